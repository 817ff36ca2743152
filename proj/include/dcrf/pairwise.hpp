#pragma once

#include "dcrf/lattice.hpp"
#include "dcrf/model.hpp"

#include <atomic>
#include <memory>
#include <vector>

namespace dcrf {

// The weighted kernel sum K = sum_m w_m K^(m) (diagonal included) as a linear operator.
class PairwiseOperator {
 public:
  virtual ~PairwiseOperator() = default;

  Index n_points() const { return n_; }
  // Diagonal of the operator: the part of apply() a point contributes to itself.
  const Vector& self_response() const { return self_; }

  // One filter-suite invocation: K applied to every column of values.
  Matrix apply(const Matrix& values) const;

  // out_a = sum_b K_ab v_b [levels_a >= levels_b] (GreaterEqual) or [<=]. Levels in [0,1].
  Vector apply_ordered(const Vector& values, const Vector& levels, Comparison cmp) const;

  std::size_t filter_calls() const { return filter_calls_.load(); }
  std::size_t ordered_calls() const { return ordered_calls_.load(); }

 protected:
  explicit PairwiseOperator(Index n) : self_(Vector::Zero(n)), n_(n) {}
  virtual Matrix do_apply(const Matrix& values) const = 0;
  virtual Vector do_apply_ordered(const Vector& values, const Vector& levels,
                                  Comparison cmp) const = 0;

  Vector self_;

 private:
  Index n_;
  mutable std::atomic<std::size_t> filter_calls_{0};
  mutable std::atomic<std::size_t> ordered_calls_{0};
};

// Permutohedral-lattice backend, linear in N.
class LatticePairwise final : public PairwiseOperator {
 public:
  LatticePairwise(const CrfModel& model, int n_bins = 16, Execution exec = Execution::Parallel);
  int n_bins() const { return n_bins_; }
  const std::vector<PermutohedralLattice>& lattices() const { return lattices_; }

 private:
  Matrix do_apply(const Matrix& values) const override;
  Vector do_apply_ordered(const Vector& values, const Vector& levels, Comparison cmp) const override;

  std::vector<PermutohedralLattice> lattices_;
  std::vector<double> weights_;
  int n_bins_;
  Execution exec_;
};

// Exact O(N^2) backend with exact comparisons.
class DensePairwise final : public PairwiseOperator {
 public:
  explicit DensePairwise(const CrfModel& model, Execution exec = Execution::Parallel);
  const Matrix& gram() const { return gram_; }

 private:
  Matrix do_apply(const Matrix& values) const override;
  Vector do_apply_ordered(const Vector& values, const Vector& levels, Comparison cmp) const override;

  Matrix gram_;
  Execution exec_;
};

// Psi v = Potts (x) (K - diag K) v, via one apply on [v | rowsum(v)].
Matrix potts_product(const PairwiseOperator& op, const Matrix& v);

}  // namespace dcrf
