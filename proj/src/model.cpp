#include "dcrf/model.hpp"

#include "dcrf/pairwise.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

namespace dcrf {

std::vector<double> KernelSpec::per_dimension() const {
  const int d = feature_dimension();
  if (static_cast<int>(bandwidths.size()) == d) return bandwidths;
  if (kind == FeatureKind::Bilateral && bandwidths.size() == 2)
    return {bandwidths[0], bandwidths[0], bandwidths[1], bandwidths[1], bandwidths[1]};
  if (kind == FeatureKind::Spatial && bandwidths.size() == 1) return {bandwidths[0], bandwidths[0]};
  throw InvalidInput("KernelSpec: wrong number of bandwidths");
}

void KernelSpec::validate() const {
  if (!(weight >= 0.0) || !std::isfinite(weight)) throw InvalidInput("KernelSpec: weight must be >= 0");
  for (double s : per_dimension()) {
    if (!(s > 0.0) || !std::isfinite(s)) throw InvalidInput("KernelSpec: bandwidths must be > 0");
  }
}

Matrix compute_features(const RgbImage& image, const KernelSpec& spec) {
  spec.validate();
  if (image.width < 1 || image.height < 1 ||
      image.pixels.size() != static_cast<std::size_t>(3 * image.size()))
    throw InvalidInput("compute_features: image dimensions do not match pixel data");
  const std::vector<double> sigma = spec.per_dimension();
  Matrix f(image.size(), spec.feature_dimension());
  for (int y = 0; y < image.height; ++y) {
    for (int x = 0; x < image.width; ++x) {
      Index a = static_cast<Index>(y) * image.width + x;
      f(a, 0) = x / sigma[0];
      f(a, 1) = y / sigma[1];
      if (spec.kind == FeatureKind::Bilateral) {
        auto c = image.color(a);
        for (int ch = 0; ch < 3; ++ch) f(a, 2 + ch) = c[ch] / sigma[2 + ch];
      }
    }
  }
  return f;
}

double clique_cost(double variance, double gamma, double eta) {
  if (!(eta > 0.0)) throw InvalidInput("clique_cost: eta must be > 0");
  return gamma * std::exp(-variance / eta);
}

double color_variance(const RgbImage& image, std::span<const int> members) {
  if (members.empty()) return 0.0;
  double total = 0;
  for (int ch = 0; ch < 3; ++ch) {
    double mean = 0;
    for (int a : members) mean += image.color(a)[ch];
    mean /= members.size();
    double var = 0;
    for (int a : members) {
      double d = image.color(a)[ch] - mean;
      var += d * d;
    }
    total += var / members.size();
  }
  return total / 3.0;
}

CliqueSet::CliqueSet(Index n_pixels, std::vector<std::vector<int>> members, std::vector<double> costs,
                     std::vector<double> variances)
    : n_pixels_(n_pixels), members_(std::move(members)), costs_(std::move(costs)),
      variances_(std::move(variances)) {
  if (costs_.size() != members_.size()) throw InvalidInput("CliqueSet: one cost per clique required");
  if (variances_.empty()) variances_.assign(members_.size(), 0.0);
  if (variances_.size() != members_.size())
    throw InvalidInput("CliqueSet: one variance per clique required");
  assignment_.assign(static_cast<std::size_t>(n_pixels_), -1);
  for (std::size_t p = 0; p < members_.size(); ++p) {
    if (members_[p].size() < 3) throw InvalidInput("CliqueSet: every clique needs >= 3 members");
    if (!(costs_[p] >= 0.0) || !std::isfinite(costs_[p]))
      throw InvalidInput("CliqueSet: clique costs must be finite and >= 0");
    for (int a : members_[p]) {
      if (a < 0 || a >= n_pixels_) throw InvalidInput("CliqueSet: member index out of range");
      if (assignment_[a] >= 0) throw InvalidInput("CliqueSet: cliques must be disjoint");
      assignment_[a] = static_cast<int>(p);
    }
  }
}

CliqueSet CliqueSet::from_segments(const RgbImage& image, std::span<const int> segments, double gamma,
                                   double eta, int min_size) {
  if (static_cast<Index>(segments.size()) != image.size())
    throw InvalidInput("CliqueSet: segment map length does not match image");
  std::map<int, std::vector<int>> groups;
  for (std::size_t a = 0; a < segments.size(); ++a) {
    if (segments[a] < 0) throw InvalidInput("CliqueSet: negative segment id");
    if (segments[a] != 0) groups[segments[a]].push_back(static_cast<int>(a));
  }
  std::vector<std::vector<int>> members;
  std::vector<double> costs, variances;
  for (auto& [id, group] : groups) {
    if (static_cast<int>(group.size()) < std::max(3, min_size)) continue;
    double var = color_variance(image, group);
    variances.push_back(var);
    costs.push_back(clique_cost(var, gamma, eta));
    members.push_back(std::move(group));
  }
  return CliqueSet(image.size(), std::move(members), std::move(costs), std::move(variances));
}

CrfModel::CrfModel(Matrix unaries, std::vector<PairwiseTerm> kernels, CliqueSet cliques,
                   CliqueParams params)
    : unaries_(std::move(unaries)), kernels_(std::move(kernels)), cliques_(std::move(cliques)),
      params_(params) {
  space_ = {unaries_.rows(), unaries_.cols()};
  if (space_.n_pixels < 1 || space_.n_labels < 1) throw InvalidInput("CrfModel: need N >= 1 and M >= 1");
  if (!unaries_.allFinite()) throw InvalidInput("CrfModel: unaries must be finite");
  if (kernels_.empty()) throw InvalidInput("CrfModel: at least one kernel required");
  for (const auto& k : kernels_) {
    if (!(k.weight >= 0.0) || !std::isfinite(k.weight)) throw InvalidInput("CrfModel: kernel weight must be >= 0");
    if (k.features.rows() != space_.n_pixels)
      throw InvalidInput("CrfModel: kernel feature rows do not match unary rows");
    if (!k.features.allFinite()) throw InvalidInput("CrfModel: non-finite features");
  }
  if (cliques_.empty() && cliques_.n_pixels() == 0) {
    cliques_ = CliqueSet(space_.n_pixels, {}, {});
  } else if (cliques_.n_pixels() != space_.n_pixels) {
    throw InvalidInput("CrfModel: clique set pixel count does not match unaries");
  }
}

CrfModel CrfModel::from_image(const RgbImage& image, Matrix unaries, const std::vector<KernelSpec>& specs,
                              CliqueSet cliques, CliqueParams params) {
  if (unaries.rows() != image.size())
    throw InvalidInput("CrfModel: image pixel count does not match unary rows");
  std::vector<PairwiseTerm> terms;
  for (const auto& s : specs) terms.push_back({s.weight, compute_features(image, s)});
  return CrfModel(std::move(unaries), std::move(terms), std::move(cliques), params);
}

double CrfModel::self_weight() const {
  double w = 0;
  for (const auto& k : kernels_) w += k.weight;
  return w;
}

double CrfModel::kernel_value(Index a, Index b) const {
  double v = 0;
  for (const auto& k : kernels_) {
    if (k.weight == 0.0) continue;
    double d2 = (k.features.row(a) - k.features.row(b)).squaredNorm();
    v += k.weight * std::exp(-0.5 * d2);
  }
  return v;
}

double CrfModel::clique_offset() const {
  double c = 0;
  for (double cp : cliques_.costs()) c += cp;
  return static_cast<double>(space_.n_labels - 1) * c;
}

bool is_row_stochastic(const Matrix& y, double tol) {
  for (Index a = 0; a < y.rows(); ++a) {
    if (y.row(a).minCoeff() < -tol) return false;
    if (std::abs(y.row(a).sum() - 1.0) > tol) return false;
  }
  return true;
}

Matrix clique_sums(const CrfModel& model, const Matrix& y) {
  const CliqueSet& cl = model.cliques();
  Matrix hy = Matrix::Zero(cl.size(), y.cols());
  for (Index p = 0; p < cl.size(); ++p) {
    for (int a : cl.members(p)) hy.row(p) += y.row(a);
  }
  return hy;
}

namespace {

void check_labeling(const CrfModel& model, const DiscreteLabeling& x) {
  if (static_cast<Index>(x.x.size()) != model.n_pixels())
    throw InvalidInput("labeling length does not match model");
  for (int l : x.x) {
    if (l < 0 || l >= model.n_labels()) throw InvalidInput("label index out of range");
  }
}

void check_relaxed(const CrfModel& model, const RelaxedLabeling& s) {
  if (s.y.rows() != model.n_pixels() || s.y.cols() != model.n_labels())
    throw InvalidInput("y dimensions do not match model");
  if (s.z.rows() != model.cliques().size() || (s.z.rows() > 0 && s.z.cols() != model.n_labels()))
    throw InvalidInput("z dimensions do not match model");
}

double unary_term(const CrfModel& model, const DiscreteLabeling& x) {
  double e = 0;
  for (Index a = 0; a < model.n_pixels(); ++a) e += model.unaries()(a, x.x[a]);
  return e;
}

double clique_term(const CrfModel& model, const DiscreteLabeling& x) {
  const CliqueSet& cl = model.cliques();
  double e = 0;
  for (Index p = 0; p < cl.size(); ++p) {
    auto m = cl.members(p);
    bool uniform = std::all_of(m.begin(), m.end(), [&](int a) { return x.x[a] == x.x[m[0]]; });
    if (!uniform) e += cl.cost(p);
  }
  return e;
}

Matrix one_hot(const CrfModel& model, const DiscreteLabeling& x) {
  Matrix y = Matrix::Zero(model.n_pixels(), model.n_labels());
  for (Index a = 0; a < model.n_pixels(); ++a) y(a, x.x[a]) = 1.0;
  return y;
}

// c'z + (1-z)'CH(1-y) - (M-1) sum C_p
double qp_clique_term(const CrfModel& model, const RelaxedLabeling& s) {
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

double lp_clique_term(const CrfModel& model, const Matrix& y) {
  const CliqueSet& cl = model.cliques();
  double e = 0;
  for (Index p = 0; p < cl.size(); ++p) {
    auto m = cl.members(p);
    double spread = 0;
    for (Index i = 0; i < y.cols(); ++i) {
      double lo = y(m[0], i), hi = y(m[0], i);
      for (int a : m) {
        lo = std::min(lo, y(a, i));
        hi = std::max(hi, y(a, i));
      }
      spread = std::max(spread, hi - lo);
    }
    e += cl.cost(p) * spread;
  }
  return e;
}

}  // namespace

RelaxedLabeling integral_labeling(const CrfModel& model, const DiscreteLabeling& x) {
  check_labeling(model, x);
  RelaxedLabeling s;
  s.y = one_hot(model, x);
  const CliqueSet& cl = model.cliques();
  s.z = Matrix::Ones(cl.size(), model.n_labels());
  for (Index p = 0; p < cl.size(); ++p) {
    auto m = cl.members(p);
    bool uniform = std::all_of(m.begin(), m.end(), [&](int a) { return x.x[a] == x.x[m[0]]; });
    if (uniform) s.z(p, x.x[m[0]]) = 0.0;
  }
  return s;
}

double discrete_energy(const CrfModel& model, const DiscreteLabeling& x) {
  check_labeling(model, x);
  const Index n = model.n_pixels();
  std::vector<double> rows(static_cast<std::size_t>(n), 0.0);
#pragma omp parallel for schedule(dynamic, 16)
  for (Index a = 0; a < n; ++a) {
    double r = 0;
    for (Index b = 0; b < n; ++b) {
      if (b != a && x.x[a] != x.x[b]) r += model.kernel_value(a, b);
    }
    rows[a] = r;
  }
  double pairwise = 0;
  for (double r : rows) pairwise += r;
  return unary_term(model, x) + pairwise + clique_term(model, x);
}

double discrete_energy(const CrfModel& model, const PairwiseOperator& op, const DiscreteLabeling& x) {
  check_labeling(model, x);
  Matrix y = one_hot(model, x);
  Matrix psi = potts_product(op, y);
  return unary_term(model, x) + y.cwiseProduct(psi).sum() + clique_term(model, x);
}

double qp_objective(const CrfModel& model, const PairwiseOperator& op, const RelaxedLabeling& s) {
  check_relaxed(model, s);
  Matrix psi = potts_product(op, s.y);
  return model.unaries().cwiseProduct(s.y).sum() + s.y.cwiseProduct(psi).sum() +
         qp_clique_term(model, s);
}

double qp_objective(const CrfModel& model, const RelaxedLabeling& s) {
  DensePairwise op(model);
  return qp_objective(model, op, s);
}

double lp_objective(const CrfModel& model, const Matrix& y) {
  if (y.rows() != model.n_pixels() || y.cols() != model.n_labels())
    throw InvalidInput("lp_objective: y dimensions do not match model");
  const Index n = model.n_pixels();
  double pairwise = 0;
  for (Index a = 0; a < n; ++a) {
    for (Index b = 0; b < n; ++b) {
      if (a == b) continue;
      double k = model.kernel_value(a, b);
      pairwise += 0.5 * k * (y.row(a) - y.row(b)).cwiseAbs().sum();
    }
  }
  return model.unaries().cwiseProduct(y).sum() + pairwise + lp_clique_term(model, y);
}

double lp_objective(const CrfModel& model, const PairwiseOperator& op, const Matrix& y) {
  if (y.rows() != model.n_pixels() || y.cols() != model.n_labels())
    throw InvalidInput("lp_objective: y dimensions do not match model");
  const Index n = model.n_pixels();
  // sum_b K_ab |y_a - y_b| = 2 (y_a GE(1) - GE(y)) - (y_a K1 - K y)
  Vector ones = Vector::Ones(n);
  Matrix k1 = op.apply(Matrix::Ones(n, 1));
  double pairwise = 0;
  for (Index i = 0; i < y.cols(); ++i) {
    Vector col = y.col(i);
    Vector levels = col.cwiseMax(0.0).cwiseMin(1.0);
    Vector ge1 = op.apply_ordered(ones, levels, Comparison::GreaterEqual);
    Vector gey = op.apply_ordered(col, levels, Comparison::GreaterEqual);
    Matrix ky = op.apply(Matrix(col));
    for (Index a = 0; a < n; ++a)
      pairwise += 0.5 * (2.0 * (col[a] * ge1[a] - gey[a]) - (col[a] * k1(a, 0) - ky(a, 0)));
  }
  return model.unaries().cwiseProduct(y).sum() + pairwise + lp_clique_term(model, y);
}

DiscreteLabeling round_argmax(const Matrix& y) {
  DiscreteLabeling x;
  x.x.resize(static_cast<std::size_t>(y.rows()));
  for (Index a = 0; a < y.rows(); ++a) {
    Index best = 0;
    for (Index i = 1; i < y.cols(); ++i) {
      if (y(a, i) > y(a, best)) best = i;
    }
    x.x[a] = static_cast<int>(best);
  }
  return x;
}

}  // namespace dcrf
