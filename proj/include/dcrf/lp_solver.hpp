#pragma once

#include "dcrf/model.hpp"
#include "dcrf/trace.hpp"

#include <functional>
#include <span>
#include <vector>

namespace dcrf {

class PairwiseOperator;

struct LpOptions {
  int outer_iters = 5;
  int inner_iters = 10;
  int gamma_iters = 50;
  double lambda = 0.1;
  int n_bins = 16;
  double gamma_init = 1e-3;
  double stabilizer = 1e-6;
  Execution exec = Execution::Parallel;

  void validate() const;
};

// Dual products are stored, never alpha or mu themselves.
struct LpDualState {
  Matrix a_alpha;
  Matrix u_mu;
  Vector beta;
  Matrix gamma;
  Matrix y_tilde;
  Matrix anchor;
  double lambda = 0.1;
};

struct LpDirection {
  Matrix a_s;
  Matrix u_s;
};

enum class LpBlock { BetaGamma, FrankWolfe };

using LpObserver = std::function<void(const LpDualState&, LpBlock)>;
using GammaObserver = std::function<void(std::span<const double>)>;

LpDualState lp_initial_state(const CrfModel& model, const Matrix& anchor, double lambda);

// y~ = lambda (A alpha + U mu + B beta + gamma - phi) + y^k
Matrix recover_primal(const CrfModel& model, const LpDualState& state);

// g = lambda/2 |w|^2 + <w, y^k> - sum beta, with w = A alpha + U mu + B beta + gamma - phi.
double dual_objective(const CrfModel& model, const LpDualState& state);

Vector beta_optimal(const CrfModel& model, const LpDualState& state);

// 1/2 g'Qg - h'g with Q = lambda (I - J/M).
double gamma_qp_objective(std::span<const double> gamma, std::span<const double> h, double lambda);

// Multiplicative updates from `init` (must be > 0 where the optimum may be positive).
std::vector<double> gamma_qp_solve(std::span<const double> h, double lambda, int iters,
                                   std::span<const double> init, double stabilizer = 1e-6,
                                   const GammaObserver& observer = {});

// Per pixel gamma solve followed by the closed-form beta and the primal update.
void update_beta_gamma(const CrfModel& model, LpDualState& state, const LpOptions& opts, bool warm_start);

LpDirection lp_conditional_gradient(const CrfModel& model, const PairwiseOperator& op, const Matrix& y_tilde);

double lp_optimal_step(const LpDualState& state, const LpDirection& dir);

void lp_apply_step(const CrfModel& model, LpDualState& state, const LpDirection& dir, double delta);

std::vector<double> simplex_project(std::span<const double> v);
Matrix project_rows(const Matrix& y);

struct ProxResult {
  Matrix y_tilde;
  LpDualState state;
};

// T rounds of {beta/gamma block, Frank-Wolfe step on (alpha, mu)}. The returned y~ is the
// one recovered after the last beta/gamma block.
ProxResult prox_subproblem(const CrfModel& model, const PairwiseOperator& op, const Matrix& anchor,
                           const LpOptions& opts, const LpObserver& observer = {});

struct LpResult {
  Matrix y;
  EnergyTrace trace;
};

LpResult lp_minimise(const CrfModel& model, const PairwiseOperator& op, const Matrix& y0,
                     const LpOptions& opts = {}, const EnergyFn& energy = {});

}  // namespace dcrf
