#include "dcrf/lp_solver.hpp"

#include "dcrf/pairwise.hpp"
#include "dcrf/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>

namespace dcrf {

void LpOptions::validate() const {
  if (outer_iters < 1 || inner_iters < 0 || gamma_iters < 1)
    throw InvalidInput("LpOptions: iteration counts must be >= 1");
  if (!(lambda > 0.0)) throw InvalidInput("LpOptions: lambda must be > 0");
  if (n_bins < 2) throw InvalidInput("LpOptions: need at least 2 bins");
  if (!(gamma_init > 0.0)) throw InvalidInput("LpOptions: gamma_init must be > 0");
  if (!(stabilizer > 0.0)) throw InvalidInput("LpOptions: stabilizer must be > 0");
}

LpDualState lp_initial_state(const CrfModel& model, const Matrix& anchor, double lambda) {
  const Index n = model.n_pixels(), m = model.n_labels();
  if (anchor.rows() != n || anchor.cols() != m)
    throw InvalidInput("lp_initial_state: anchor dimensions do not match model");
  LpDualState st;
  st.a_alpha = Matrix::Zero(n, m);
  st.u_mu = Matrix::Zero(n, m);
  st.beta = Vector::Zero(n);
  st.gamma = Matrix::Zero(n, m);
  st.anchor = anchor;
  st.lambda = lambda;
  st.y_tilde = recover_primal(model, st);
  return st;
}

Matrix recover_primal(const CrfModel& model, const LpDualState& st) {
  const Index n = st.anchor.rows(), m = st.anchor.cols();
  const Matrix& phi = model.unaries();
  Matrix y(n, m);
  for (Index a = 0; a < n; ++a) {
    for (Index i = 0; i < m; ++i) {
      double w = ((st.a_alpha(a, i) + st.u_mu(a, i)) + st.beta[a] + st.gamma(a, i)) - phi(a, i);
      y(a, i) = st.lambda * w + st.anchor(a, i);
    }
  }
  return y;
}

double dual_objective(const CrfModel& model, const LpDualState& st) {
  const Index n = st.anchor.rows(), m = st.anchor.cols();
  const Matrix& phi = model.unaries();
  double sq = 0, lin = 0, bsum = 0;
  for (Index a = 0; a < n; ++a) {
    for (Index i = 0; i < m; ++i) {
      double w = ((st.a_alpha(a, i) + st.u_mu(a, i)) + st.beta[a] + st.gamma(a, i)) - phi(a, i);
      sq += w * w;
      lin += w * st.anchor(a, i);
    }
    bsum += st.beta[a];
  }
  return 0.5 * st.lambda * sq + lin - bsum;
}

Vector beta_optimal(const CrfModel& model, const LpDualState& st) {
  const Index n = st.anchor.rows(), m = st.anchor.cols();
  const Matrix& phi = model.unaries();
  Vector beta(n);
  for (Index a = 0; a < n; ++a) {
    double s = 0;
    for (Index i = 0; i < m; ++i) s += (st.a_alpha(a, i) + st.u_mu(a, i) + st.gamma(a, i)) - phi(a, i);
    beta[a] = -s / static_cast<double>(m);
  }
  return beta;
}

double gamma_qp_objective(std::span<const double> gamma, std::span<const double> h, double lambda) {
  const double m = static_cast<double>(gamma.size());
  double s = 0, sq = 0, lin = 0;
  for (std::size_t i = 0; i < gamma.size(); ++i) {
    s += gamma[i];
    sq += gamma[i] * gamma[i];
    lin += h[i] * gamma[i];
  }
  return 0.5 * lambda * (sq - s * s / m) - lin;
}

std::vector<double> gamma_qp_solve(std::span<const double> h, double lambda, int iters,
                                   std::span<const double> init, double stabilizer,
                                   const GammaObserver& observer) {
  const std::size_t m = h.size();
  if (init.size() != m) throw InvalidInput("gamma_qp_solve: init length does not match h");
  const double md = static_cast<double>(m);
  std::vector<double> g(init.begin(), init.end()), next(m);
  for (double v : g) {
    if (!(v >= 0.0)) throw InvalidInput("gamma_qp_solve: init must be nonnegative");
  }
  if (observer) observer(g);
  for (int it = 0; it < iters; ++it) {
    double s = std::accumulate(g.begin(), g.end(), 0.0);
    for (std::size_t i = 0; i < m; ++i) {
      // Q- g = lambda/M (S - g_i);  |Q| g = lambda (1 - 2/M) g_i + lambda S / M
      double neg = lambda / md * (s - g[i]);
      double abs = lambda * (1.0 - 2.0 / md) * g[i] + lambda * s / md;
      double hp = std::max(h[i], 0.0), hn = std::max(-h[i], 0.0);
      next[i] = g[i] * (2.0 * neg + hp + stabilizer) / (abs + hn + stabilizer);
    }
    g.swap(next);
    if (observer) observer(g);
  }
  return g;
}

void update_beta_gamma(const CrfModel& model, LpDualState& st, const LpOptions& opts, bool warm_start) {
  const Index n = st.anchor.rows(), m = st.anchor.cols();
  const Matrix& phi = model.unaries();
  const double lambda = st.lambda;
  parallel_for(0, n, opts.exec, [&](Index a) {
    std::vector<double> x(m), h(m), init(m);
    double mean = 0;
    for (Index i = 0; i < m; ++i) {
      x[i] = (st.a_alpha(a, i) + st.u_mu(a, i)) - phi(a, i);
      mean += x[i];
    }
    mean /= static_cast<double>(m);
    for (Index i = 0; i < m; ++i) {
      h[i] = -lambda * (x[i] - mean) - st.anchor(a, i);
      init[i] = warm_start ? std::max(st.gamma(a, i), 0.0) : opts.gamma_init;
    }
    std::vector<double> g = gamma_qp_solve(h, lambda, opts.gamma_iters, init, opts.stabilizer);
    double s = 0;
    for (Index i = 0; i < m; ++i) {
      st.gamma(a, i) = g[i];
      s += (st.a_alpha(a, i) + st.u_mu(a, i) + g[i]) - phi(a, i);
    }
    st.beta[a] = -s / static_cast<double>(m);
  });
  st.y_tilde = recover_primal(model, st);
}

LpDirection lp_conditional_gradient(const CrfModel& model, const PairwiseOperator& op, const Matrix& y_tilde) {
  const Index n = y_tilde.rows(), m = y_tilde.cols();
  LpDirection dir;
  dir.a_s = Matrix::Zero(n, m);
  dir.u_s = Matrix::Zero(n, m);

  const Vector ones = Vector::Ones(n);
  for (Index i = 0; i < m; ++i) {
    Vector col = y_tilde.col(i);
    double lo = col.minCoeff(), hi = col.maxCoeff();
    if (!(hi > lo)) continue;
    // Min-max rescaling is monotone, so the indicators are unchanged.
    Vector levels = ((col.array() - lo) / (hi - lo)).cwiseMax(0.0).cwiseMin(1.0).matrix();
    Vector le = op.apply_ordered(ones, levels, Comparison::LessEqual);
    Vector ge = op.apply_ordered(ones, levels, Comparison::GreaterEqual);
    dir.a_s.col(i) = le - ge;
  }

  const CliqueSet& cl = model.cliques();
  for (Index p = 0; p < cl.size(); ++p) {
    auto mem = cl.members(p);
    double best_spread = 0;
    int best_lo = -1, best_hi = -1;
    Index best_label = -1;
    for (Index i = 0; i < m; ++i) {
      int lo = mem[0], hi = mem[0];
      for (int c : mem) {
        if (y_tilde(c, i) < y_tilde(lo, i)) lo = c;
        if (y_tilde(c, i) > y_tilde(hi, i)) hi = c;
      }
      double spread = y_tilde(hi, i) - y_tilde(lo, i);
      if (spread > best_spread) {
        best_spread = spread;
        best_lo = lo;
        best_hi = hi;
        best_label = i;
      }
    }
    if (best_label < 0) continue;
    dir.u_s(best_lo, best_label) += cl.cost(p);
    dir.u_s(best_hi, best_label) -= cl.cost(p);
  }
  return dir;
}

double lp_optimal_step(const LpDualState& st, const LpDirection& dir) {
  Matrix diff = (st.a_alpha + st.u_mu) - (dir.a_s + dir.u_s);
  double denom = st.lambda * diff.squaredNorm();
  if (!(denom > 0.0)) return 0.0;
  double num = diff.cwiseProduct(st.y_tilde).sum();
  return std::clamp(num / denom, 0.0, 1.0);
}

void lp_apply_step(const CrfModel& model, LpDualState& st, const LpDirection& dir, double delta) {
  if (delta == 0.0) return;
  st.a_alpha += delta * (dir.a_s - st.a_alpha);
  st.u_mu += delta * (dir.u_s - st.u_mu);
  st.y_tilde = recover_primal(model, st);
}

std::vector<double> simplex_project(std::span<const double> v) {
  const std::size_t m = v.size();
  std::vector<double> u(v.begin(), v.end());
  std::sort(u.begin(), u.end(), std::greater<>());
  double cum = 0, theta = 0;
  for (std::size_t j = 0; j < m; ++j) {
    cum += u[j];
    double t = (cum - 1.0) / static_cast<double>(j + 1);
    if (u[j] - t > 0.0) theta = t;
  }
  std::vector<double> w(m);
  for (std::size_t i = 0; i < m; ++i) w[i] = std::max(v[i] - theta, 0.0);
  return w;
}

Matrix project_rows(const Matrix& y) {
  Matrix out(y.rows(), y.cols());
  for (Index a = 0; a < y.rows(); ++a) {
    std::vector<double> w = simplex_project(std::span<const double>(y.data() + a * y.cols(), y.cols()));
    for (Index i = 0; i < y.cols(); ++i) out(a, i) = w[i];
  }
  return out;
}

ProxResult prox_subproblem(const CrfModel& model, const PairwiseOperator& op, const Matrix& anchor,
                           const LpOptions& opts, const LpObserver& observer) {
  opts.validate();
  ProxResult r{Matrix(), lp_initial_state(model, anchor, opts.lambda)};
  LpDualState& st = r.state;
  r.y_tilde = st.y_tilde;
  for (int t = 0; t < opts.inner_iters; ++t) {
    update_beta_gamma(model, st, opts, t > 0);
    r.y_tilde = st.y_tilde;
    if (observer) observer(st, LpBlock::BetaGamma);

    LpDirection dir = lp_conditional_gradient(model, op, st.y_tilde);
    double delta = lp_optimal_step(st, dir);
    lp_apply_step(model, st, dir, delta);
    if (observer) observer(st, LpBlock::FrankWolfe);
  }
  if (!r.y_tilde.allFinite()) throw SolverFailure("prox_subproblem: primal iterate became non-finite");
  return r;
}

LpResult lp_minimise(const CrfModel& model, const PairwiseOperator& op, const Matrix& y0,
                     const LpOptions& opts, const EnergyFn& energy) {
  opts.validate();
  if (y0.rows() != model.n_pixels() || y0.cols() != model.n_labels())
    throw InvalidInput("lp_minimise: initial labeling dimensions do not match model");
  if (!is_row_stochastic(y0, 1e-6)) throw InvalidInput("lp_minimise: initial labeling must be row-stochastic");
  EnergyFn eval = energy ? energy : trace_energy(model, op);
  Stopwatch clock;
  LpResult result;
  result.y = y0;

  auto record = [&](int k) {
    double t = clock.seconds();
    clock.pause();
    double e = eval(round_argmax(result.y));
    double rel = lp_objective(model, op, result.y);
    result.trace.records.push_back({k, t, e, rel});
    clock.resume();
  };
  record(0);
  for (int k = 1; k <= opts.outer_iters; ++k) {
    ProxResult prox = prox_subproblem(model, op, result.y, opts);
    result.y = project_rows(prox.y_tilde);
    record(k);
  }
  return result;
}

}  // namespace dcrf
