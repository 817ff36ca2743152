#pragma once

#include "dcrf/model.hpp"
#include "dcrf/trace.hpp"

namespace dcrf {

class PairwiseOperator;

enum class QpInit { UnaryArgmin, Uniform };

struct QpOptions {
  int max_iters = 100;
  // Stop when the objective decreased by less than rel_tol (relative) over `window` iterations.
  double rel_tol = 1e-6;
  int window = 5;
  QpInit init = QpInit::UnaryArgmin;

  void validate() const;
};

struct QpState {
  RelaxedLabeling s;
  Matrix two_psi_y;  // 2 Psi y
  Matrix ht_c_z;     // H'C z, per pixel and label
  int iteration = 0;
  double objective = 0.0;
};

struct QpGradient {
  Matrix y;
  Matrix z;
};

struct QpStep {
  double delta = 0.0;
  Matrix psi_d;  // Psi (s_y - y), reused by the incremental gradient
  double quadratic = 0.0;
  double linear = 0.0;
};

struct QpResult {
  RelaxedLabeling s;
  EnergyTrace trace;
  int iterations = 0;
  bool converged = false;
};

RelaxedLabeling qp_initial_point(const CrfModel& model, QpInit init);

// Builds the cached products for s with one filter-suite invocation.
QpState qp_make_state(const CrfModel& model, const PairwiseOperator& op, RelaxedLabeling s);

QpGradient qp_gradient(const CrfModel& model, const QpState& state);

RelaxedLabeling qp_conditional_gradient(const QpGradient& grad);

QpStep qp_optimal_step(const CrfModel& model, const PairwiseOperator& op, const QpState& state,
                       const QpGradient& grad, const RelaxedLabeling& target);

void qp_apply_step(const CrfModel& model, QpState& state, const RelaxedLabeling& target,
                   const QpStep& step);

QpResult qp_minimise(const CrfModel& model, const PairwiseOperator& op, const QpOptions& opts = {},
                     const EnergyFn& energy = {});
QpResult qp_minimise(const CrfModel& model, const QpOptions& opts = {});

}  // namespace dcrf
