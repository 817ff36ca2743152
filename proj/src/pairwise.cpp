#include "dcrf/pairwise.hpp"

#include "dcrf/parallel.hpp"

#include <cmath>

namespace dcrf {

Matrix PairwiseOperator::apply(const Matrix& values) const {
  if (values.rows() != n_) throw InvalidInput("PairwiseOperator: value rows do not match N");
  ++filter_calls_;
  return do_apply(values);
}

Vector PairwiseOperator::apply_ordered(const Vector& values, const Vector& levels, Comparison cmp) const {
  if (values.size() != n_ || levels.size() != n_)
    throw InvalidInput("PairwiseOperator: ordered inputs do not match N");
  ++ordered_calls_;
  return do_apply_ordered(values, levels, cmp);
}

LatticePairwise::LatticePairwise(const CrfModel& model, int n_bins, Execution exec)
    : PairwiseOperator(model.n_pixels()), n_bins_(n_bins), exec_(exec) {
  if (n_bins < 2) throw InvalidInput("LatticePairwise: need at least 2 bins");
  for (const auto& k : model.kernels()) {
    if (k.weight == 0.0) continue;
    lattices_.emplace_back(k.features);
    weights_.push_back(k.weight);
    self_ += k.weight * lattices_.back().self_response();
  }
}

Matrix LatticePairwise::do_apply(const Matrix& values) const {
  Matrix out = Matrix::Zero(values.rows(), values.cols());
  for (std::size_t m = 0; m < lattices_.size(); ++m) out += weights_[m] * lattices_[m].filter(values, exec_);
  return out;
}

Vector LatticePairwise::do_apply_ordered(const Vector& values, const Vector& levels, Comparison cmp) const {
  Vector out = Vector::Zero(values.size());
  OrderedFilterConfig cfg{n_bins_, cmp};
  for (std::size_t m = 0; m < lattices_.size(); ++m)
    out += weights_[m] * lattices_[m].filter_ordered(values, levels, cfg, exec_);
  return out;
}

DensePairwise::DensePairwise(const CrfModel& model, Execution exec)
    : PairwiseOperator(model.n_pixels()), exec_(exec) {
  self_.setConstant(model.self_weight());
  const Index n = model.n_pixels();
  gram_.resize(n, n);
  parallel_for(0, n, exec_, [&](Index a) {
    for (Index b = 0; b < n; ++b) gram_(a, b) = model.kernel_value(a, b);
  });
}

Matrix DensePairwise::do_apply(const Matrix& values) const {
  Matrix out(values.rows(), values.cols());
  parallel_for(0, values.rows(), exec_, [&](Index a) { out.row(a) = gram_.row(a) * values; });
  return out;
}

Vector DensePairwise::do_apply_ordered(const Vector& values, const Vector& levels, Comparison cmp) const {
  const Index n = values.size();
  Vector out(n);
  parallel_for(0, n, exec_, [&](Index a) {
    double acc = 0;
    for (Index b = 0; b < n; ++b) {
      bool keep = cmp == Comparison::GreaterEqual ? levels[a] >= levels[b] : levels[a] <= levels[b];
      if (keep) acc += gram_(a, b) * values[b];
    }
    out[a] = acc;
  });
  return out;
}

Matrix potts_product(const PairwiseOperator& op, const Matrix& v) {
  const Index n = v.rows();
  const Index m = v.cols();
  Matrix x(n, m + 1);
  x.leftCols(m) = v;
  x.col(m) = v.rowwise().sum();
  Matrix kx = op.apply(x);
  const Vector& self = op.self_response();
  Matrix out(n, m);
  for (Index a = 0; a < n; ++a) {
    double total = kx(a, m) - self[a] * x(a, m);
    for (Index i = 0; i < m; ++i) out(a, i) = total - (kx(a, i) - self[a] * v(a, i));
  }
  return out;
}

}  // namespace dcrf
