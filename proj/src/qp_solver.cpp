#include "dcrf/qp_solver.hpp"

#include "dcrf/pairwise.hpp"

#include <algorithm>
#include <cmath>

namespace dcrf {

namespace {

// H'C w: pixel a in clique p receives C_p w_p.
Matrix spread_to_pixels(const CrfModel& model, const Matrix& w) {
  const CliqueSet& cl = model.cliques();
  Matrix out = Matrix::Zero(model.n_pixels(), model.n_labels());
  for (Index p = 0; p < cl.size(); ++p) {
    for (int a : cl.members(p)) out.row(a) = cl.cost(p) * w.row(p);
  }
  return out;
}

double clique_part(const CrfModel& model, const RelaxedLabeling& s) {
  const CliqueSet& cl = model.cliques();
  if (cl.empty()) return 0.0;
  Matrix hy = clique_sums(model, s.y);
  double e = 0;
  for (Index p = 0; p < cl.size(); ++p) {
    double size = static_cast<double>(cl.members(p).size());
    for (Index i = 0; i < model.n_labels(); ++i)
      e += cl.cost(p) * (s.z(p, i) + (1.0 - s.z(p, i)) * (size - hy(p, i)));
  }
  return e - model.clique_offset();
}

}  // namespace

void QpOptions::validate() const {
  if (max_iters < 1) throw InvalidInput("QpOptions: max_iters must be >= 1");
  if (window < 1) throw InvalidInput("QpOptions: window must be >= 1");
  if (!(rel_tol >= 0.0)) throw InvalidInput("QpOptions: rel_tol must be >= 0");
}

RelaxedLabeling qp_initial_point(const CrfModel& model, QpInit init) {
  if (init == QpInit::UnaryArgmin) {
    DiscreteLabeling x;
    x.x.resize(static_cast<std::size_t>(model.n_pixels()));
    for (Index a = 0; a < model.n_pixels(); ++a) {
      Index best;
      model.unaries().row(a).minCoeff(&best);
      x.x[a] = static_cast<int>(best);
    }
    return integral_labeling(model, x);
  }
  RelaxedLabeling s;
  s.y = Matrix::Constant(model.n_pixels(), model.n_labels(), 1.0 / model.n_labels());
  s.z = Matrix::Ones(model.cliques().size(), model.n_labels());
  return s;
}

QpState qp_make_state(const CrfModel& model, const PairwiseOperator& op, RelaxedLabeling s) {
  if (s.y.rows() != model.n_pixels() || s.y.cols() != model.n_labels() ||
      s.z.rows() != model.cliques().size())
    throw InvalidInput("qp_make_state: labeling dimensions do not match model");
  QpState st;
  st.two_psi_y = 2.0 * potts_product(op, s.y);
  st.ht_c_z = spread_to_pixels(model, s.z);
  st.objective = model.unaries().cwiseProduct(s.y).sum() + 0.5 * s.y.cwiseProduct(st.two_psi_y).sum() +
                 clique_part(model, s);
  st.s = std::move(s);
  return st;
}

QpGradient qp_gradient(const CrfModel& model, const QpState& state) {
  const CliqueSet& cl = model.cliques();
  QpGradient g;
  g.y = model.unaries() + state.two_psi_y + state.ht_c_z;
  for (Index p = 0; p < cl.size(); ++p) {
    for (int a : cl.members(p)) g.y.row(a).array() -= cl.cost(p);
  }
  Matrix hy = clique_sums(model, state.s.y);
  g.z.resize(cl.size(), model.n_labels());
  for (Index p = 0; p < cl.size(); ++p) {
    double size = static_cast<double>(cl.members(p).size());
    for (Index i = 0; i < model.n_labels(); ++i) g.z(p, i) = cl.cost(p) * (1.0 + hy(p, i) - size);
  }
  return g;
}

RelaxedLabeling qp_conditional_gradient(const QpGradient& grad) {
  RelaxedLabeling s;
  s.y = Matrix::Zero(grad.y.rows(), grad.y.cols());
  for (Index a = 0; a < grad.y.rows(); ++a) {
    Index best = 0;
    for (Index i = 1; i < grad.y.cols(); ++i) {
      if (grad.y(a, i) < grad.y(a, best)) best = i;
    }
    s.y(a, best) = 1.0;
  }
  s.z = (grad.z.array() < 0.0).cast<double>().matrix();
  return s;
}

QpStep qp_optimal_step(const CrfModel& model, const PairwiseOperator& op, const QpState& state,
                       const QpGradient& grad, const RelaxedLabeling& target) {
  const CliqueSet& cl = model.cliques();
  Matrix dy = target.y - state.s.y;
  Matrix dz = target.z - state.s.z;
  QpStep step;
  step.psi_d = potts_product(op, dy);
  if (dy.isZero(0.0) && dz.isZero(0.0)) return step;

  Matrix hdy = clique_sums(model, dy);
  double coupling = 0;
  for (Index p = 0; p < cl.size(); ++p) coupling += cl.cost(p) * dz.row(p).dot(hdy.row(p));
  step.quadratic = dy.cwiseProduct(step.psi_d).sum() + coupling;
  step.linear = grad.y.cwiseProduct(dy).sum() + grad.z.cwiseProduct(dz).sum();

  // f(delta) - f(0) = quadratic * delta^2 + linear * delta
  if (step.quadratic > 0.0) {
    step.delta = std::clamp(-step.linear / (2.0 * step.quadratic), 0.0, 1.0);
  } else {
    step.delta = step.quadratic + step.linear < 0.0 ? 1.0 : 0.0;
  }
  return step;
}

void qp_apply_step(const CrfModel& model, QpState& state, const RelaxedLabeling& target,
                   const QpStep& step) {
  const double d = step.delta;
  ++state.iteration;
  if (d == 0.0) return;
  Matrix dz = target.z - state.s.z;
  state.s.y += d * (target.y - state.s.y);
  state.s.z += d * dz;
  state.two_psi_y += (2.0 * d) * step.psi_d;
  state.ht_c_z += d * spread_to_pixels(model, dz);
  state.objective += step.quadratic * d * d + step.linear * d;
}

QpResult qp_minimise(const CrfModel& model, const PairwiseOperator& op, const QpOptions& opts,
                     const EnergyFn& energy) {
  opts.validate();
  EnergyFn eval = energy ? energy : trace_energy(model, op);
  Stopwatch clock;
  QpState state = qp_make_state(model, op, qp_initial_point(model, opts.init));
  QpResult result;
  std::vector<double> history{state.objective};

  auto record = [&]() {
    double t = clock.seconds();
    clock.pause();
    double e = eval(round_argmax(state.s.y));
    result.trace.records.push_back({state.iteration, t, e, state.objective});
    clock.resume();
  };
  record();

  for (int it = 1; it <= opts.max_iters; ++it) {
    QpGradient grad = qp_gradient(model, state);
    RelaxedLabeling target = qp_conditional_gradient(grad);
    QpStep step = qp_optimal_step(model, op, state, grad, target);
    qp_apply_step(model, state, target, step);
    if (!std::isfinite(state.objective)) throw SolverFailure("qp_minimise: objective became non-finite");
    history.push_back(state.objective);
    record();
    if (step.delta == 0.0) {
      result.converged = true;
      break;
    }
    if (it >= opts.window) {
      double before = history[history.size() - 1 - opts.window];
      if (before - state.objective <= opts.rel_tol * std::max(std::abs(before), 1e-12)) {
        result.converged = true;
        break;
      }
    }
  }
  result.iterations = state.iteration;
  result.s = std::move(state.s);
  return result;
}

QpResult qp_minimise(const CrfModel& model, const QpOptions& opts) {
  LatticePairwise op(model);
  return qp_minimise(model, op, opts);
}

}  // namespace dcrf
