#include "dcrf/meanfield.hpp"

#include "dcrf/pairwise.hpp"
#include "dcrf/parallel.hpp"

#include <cmath>

namespace dcrf {

namespace {

// C_p (1 - prod_{c != a} Q_{c:i}) for every member a and label i.
void add_clique_messages(const CrfModel& model, const Matrix& q, Matrix& energy) {
  const CliqueSet& cl = model.cliques();
  const Index m = q.cols();
  for (Index p = 0; p < cl.size(); ++p) {
    auto mem = cl.members(p);
    const std::size_t r = mem.size();
    std::vector<double> prefix(r + 1), suffix(r + 1);
    for (Index i = 0; i < m; ++i) {
      prefix[0] = 1.0;
      for (std::size_t c = 0; c < r; ++c) prefix[c + 1] = prefix[c] * q(mem[c], i);
      suffix[r] = 1.0;
      for (std::size_t c = r; c-- > 0;) suffix[c] = suffix[c + 1] * q(mem[c], i);
      for (std::size_t c = 0; c < r; ++c)
        energy(mem[c], i) += cl.cost(p) * (1.0 - prefix[c] * suffix[c + 1]);
    }
  }
}

}  // namespace

Matrix softmax_neg(const Matrix& energy) {
  Matrix q(energy.rows(), energy.cols());
  for (Index a = 0; a < energy.rows(); ++a) {
    double lo = energy.row(a).minCoeff();
    double s = 0;
    for (Index i = 0; i < energy.cols(); ++i) {
      q(a, i) = std::exp(lo - energy(a, i));
      s += q(a, i);
    }
    q.row(a) /= s;
  }
  return q;
}

double mf_expected_energy(const CrfModel& model, const PairwiseOperator& op, const Matrix& q) {
  Matrix psi = potts_product(op, q);
  double e = model.unaries().cwiseProduct(q).sum() + q.cwiseProduct(psi).sum();
  const CliqueSet& cl = model.cliques();
  for (Index p = 0; p < cl.size(); ++p) {
    double uniform = 0;
    for (Index i = 0; i < q.cols(); ++i) {
      double prod = 1.0;
      for (int c : cl.members(p)) prod *= q(c, i);
      uniform += prod;
    }
    e += cl.cost(p) * (1.0 - uniform);
  }
  return e;
}

Matrix mf_update(const CrfModel& model, const PairwiseOperator& op, const Matrix& q, Execution exec) {
  if (q.rows() != model.n_pixels() || q.cols() != model.n_labels())
    throw InvalidInput("mf_update: marginal dimensions do not match model");
  Matrix psi = potts_product(op, q);
  Matrix energy(q.rows(), q.cols());
  const Matrix& phi = model.unaries();
  parallel_for(0, q.rows(), exec, [&](Index a) { energy.row(a) = phi.row(a) + 2.0 * psi.row(a); });
  add_clique_messages(model, q, energy);
  return softmax_neg(energy);
}

MfResult mf_minimise(const CrfModel& model, const PairwiseOperator& op, int iters, const EnergyFn& energy,
                     Execution exec) {
  if (iters < 0) throw InvalidInput("mf_minimise: iters must be >= 0");
  EnergyFn eval = energy ? energy : trace_energy(model, op);
  Stopwatch clock;
  MfResult result;
  result.q = softmax_neg(model.unaries());
  auto record = [&](int it) {
    double t = clock.seconds();
    clock.pause();
    double e = eval(round_argmax(result.q));
    double rel = mf_expected_energy(model, op, result.q);
    result.trace.records.push_back({it, t, e, rel});
    clock.resume();
  };
  record(0);
  for (int it = 1; it <= iters; ++it) {
    result.q = mf_update(model, op, result.q, exec);
    if (!result.q.allFinite()) throw SolverFailure("mf_minimise: marginals became non-finite");
    record(it);
  }
  return result;
}

}  // namespace dcrf
