#pragma once

#include "dcrf/types.hpp"

#include <span>
#include <vector>

namespace dcrf {

enum class Comparison { GreaterEqual, LessEqual };

struct OrderedFilterConfig {
  int n_bins = 16;
  Comparison comparison = Comparison::GreaterEqual;
};

// Bin of a level in [0,1]. GreaterEqual uses floor(y(H-1)), LessEqual uses ceil(y(H-1)).
int level_bin(double level, int n_bins, Comparison cmp);

// Permutohedral lattice over pre-divided features, so the approximated kernel is
// exp(-|f_a - f_b|^2 / 2).
class PermutohedralLattice {
 public:
  PermutohedralLattice() = default;
  explicit PermutohedralLattice(const Matrix& features);

  int dimension() const { return d_; }
  Index n_points() const { return n_; }
  Index n_vertices() const { return n_vertices_; }

  // The d+1 enclosing vertices of a point, ids in [0, n_vertices()).
  std::span<const int> vertices(Index point) const;
  std::span<const double> weights(Index point) const;

  // The b = a coefficient of filter() for every point, computed exactly.
  Vector self_response() const;

  // v'_a ~ sum_b k(f_a, f_b) v_b, including b = a.
  Matrix filter(const Matrix& values, Execution exec = Execution::Parallel) const;

  // v'_a ~ sum_b k(f_a, f_b) v_b [y_a >= y_b] (or <=) with levels quantized into bins.
  Vector filter_ordered(const Vector& values, const Vector& levels, const OrderedFilterConfig& cfg,
                        Execution exec = Execution::Parallel) const;

 private:
  // Channel-major planes of V + 1 entries each; the last entry stays zero.
  void blur_planes(std::vector<double>& planes, int channels, Execution exec) const;

  int d_ = 0;
  Index n_ = 0;
  Index n_vertices_ = 0;
  double slice_scale_ = 1.0;
  std::vector<int> offsets_;
  std::vector<double> barycentric_;
  // neighbors_[(j * V + v) * 2 + {0,1}]; V means "absent".
  std::vector<int> neighbors_;
};

PermutohedralLattice build_lattice(const Matrix& features);
Matrix filter(const PermutohedralLattice& lat, const Matrix& values,
              Execution exec = Execution::Parallel);
Vector filter_ordered(const PermutohedralLattice& lat, const Vector& values, const Vector& levels,
                      const OrderedFilterConfig& cfg, Execution exec = Execution::Parallel);

}  // namespace dcrf
