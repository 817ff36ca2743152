#pragma once

#include "dcrf/lattice.hpp"
#include "dcrf/model.hpp"

#include <functional>
#include <optional>
#include <span>
#include <vector>

// Brute-force references. Deliberately slow, and sharing no code with the fast paths.
namespace dcrf::oracle {

struct OracleBudget {
  Index max_pixels = 4096;
  Index max_labels = 64;
  Index max_clique = 64;
  double max_states = 1e6;
};

class BudgetExceeded : public InvalidInput {
 public:
  using InvalidInput::InvalidInput;
};

// Exact unit-bandwidth Gaussian Gram matrix of pre-divided features.
Matrix gaussian_gram(const Matrix& features, const OracleBudget& budget = {});

Matrix naive_gaussian_sum(const Matrix& features, const Matrix& values, const OracleBudget& budget = {});

// sum_b K_ab v_b [y_a >= y_b] (or <=). With bins, levels are compared through the same
// quantization the ordered filter uses.
Vector naive_ordered_sum(const Matrix& kernel, const Vector& values, const Vector& levels, Comparison cmp,
                         std::optional<int> bins = std::nullopt);
Vector naive_ordered_sum_features(const Matrix& features, const Vector& values, const Vector& levels,
                                  Comparison cmp, std::optional<int> bins = std::nullopt,
                                  const OracleBudget& budget = {});

double reference_energy(const CrfModel& model, const std::vector<int>& x);
// Literal relaxed objective minus (M-1) sum C_p.
double reference_qp_objective(const CrfModel& model, const Matrix& y, const Matrix& z);
double reference_lp_objective(const CrfModel& model, const Matrix& y);

struct MapResult {
  std::vector<int> x;
  double energy = 0.0;
};

MapResult exhaustive_map(const CrfModel& model, const OracleBudget& budget = {});

using Objective = std::function<double(std::span<const double>)>;
std::vector<double> fd_gradient(const Objective& f, std::span<const double> point, double eps = 1e-6);

// Argmin of f over delta = k / (resolution - 1), k = 0..resolution-1.
double grid_step_search(const std::function<double(double)>& f, int resolution = 1000);

std::vector<double> reference_simplex_projection(std::span<const double> v);

// argmin 1/2 x'Qx - h'x over x >= 0 by enumerating supports. Throws if unbounded.
std::vector<double> reference_nonneg_qp(const Matrix& q, std::span<const double> h);

}  // namespace dcrf::oracle
