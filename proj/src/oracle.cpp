#include "dcrf/oracle.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>

namespace dcrf::oracle {

namespace {

void check_pixels(Index n, const OracleBudget& budget) {
  if (n > budget.max_pixels) throw BudgetExceeded("oracle: N exceeds budget");
}

double gauss(const Matrix& f, Index a, Index b) {
  double d2 = 0;
  for (Index c = 0; c < f.cols(); ++c) {
    double d = f(a, c) - f(b, c);
    d2 += d * d;
  }
  return std::exp(-d2 / 2.0);
}

double pair_weight(const CrfModel& model, Index a, Index b) {
  double k = 0;
  for (const auto& term : model.kernels()) k += term.weight * gauss(term.features, a, b);
  return k;
}

int quantize(double y, int bins, Comparison cmp) {
  double s = y * (bins - 1);
  int q = cmp == Comparison::GreaterEqual ? int(std::floor(s)) : int(std::ceil(s));
  if (q < 0) q = 0;
  if (q > bins - 1) q = bins - 1;
  return q;
}

}  // namespace

Matrix gaussian_gram(const Matrix& features, const OracleBudget& budget) {
  const Index n = features.rows();
  check_pixels(n, budget);
  Matrix k(n, n);
  for (Index a = 0; a < n; ++a)
    for (Index b = 0; b < n; ++b) k(a, b) = gauss(features, a, b);
  return k;
}

Matrix naive_gaussian_sum(const Matrix& features, const Matrix& values, const OracleBudget& budget) {
  const Index n = features.rows();
  check_pixels(n, budget);
  if (values.rows() != n) throw InvalidInput("naive_gaussian_sum: rows do not match");
  Matrix out = Matrix::Zero(n, values.cols());
  for (Index a = 0; a < n; ++a) {
    for (Index b = 0; b < n; ++b) {
      double k = gauss(features, a, b);
      for (Index c = 0; c < values.cols(); ++c) out(a, c) += k * values(b, c);
    }
  }
  return out;
}

Vector naive_ordered_sum(const Matrix& kernel, const Vector& values, const Vector& levels, Comparison cmp,
                         std::optional<int> bins) {
  const Index n = kernel.rows();
  if (kernel.cols() != n || values.size() != n || levels.size() != n)
    throw InvalidInput("naive_ordered_sum: dimension mismatch");
  Vector out = Vector::Zero(n);
  for (Index a = 0; a < n; ++a) {
    for (Index b = 0; b < n; ++b) {
      bool keep;
      if (bins) {
        int qa = quantize(levels[a], *bins, cmp), qb = quantize(levels[b], *bins, cmp);
        keep = cmp == Comparison::GreaterEqual ? qa >= qb : qa <= qb;
      } else {
        keep = cmp == Comparison::GreaterEqual ? levels[a] >= levels[b] : levels[a] <= levels[b];
      }
      if (keep) out[a] += kernel(a, b) * values[b];
    }
  }
  return out;
}

Vector naive_ordered_sum_features(const Matrix& features, const Vector& values, const Vector& levels,
                                  Comparison cmp, std::optional<int> bins, const OracleBudget& budget) {
  return naive_ordered_sum(gaussian_gram(features, budget), values, levels, cmp, bins);
}

double reference_energy(const CrfModel& model, const std::vector<int>& x) {
  const Index n = model.n_pixels();
  if (static_cast<Index>(x.size()) != n) throw InvalidInput("reference_energy: length mismatch");
  double e = 0;
  for (Index a = 0; a < n; ++a) e += model.unaries()(a, x[a]);
  for (Index a = 0; a < n; ++a) {
    for (Index b = 0; b < n; ++b) {
      if (a != b && x[a] != x[b]) e += pair_weight(model, a, b);
    }
  }
  const CliqueSet& cl = model.cliques();
  for (Index p = 0; p < cl.size(); ++p) {
    auto m = cl.members(p);
    bool mixed = false;
    for (int a : m) mixed = mixed || x[a] != x[m[0]];
    if (mixed) e += cl.cost(p);
  }
  return e;
}

double reference_qp_objective(const CrfModel& model, const Matrix& y, const Matrix& z) {
  const Index n = model.n_pixels(), m = model.n_labels();
  double e = 0;
  for (Index a = 0; a < n; ++a)
    for (Index i = 0; i < m; ++i) e += model.unaries()(a, i) * y(a, i);
  for (Index a = 0; a < n; ++a) {
    for (Index b = 0; b < n; ++b) {
      if (a == b) continue;
      double k = pair_weight(model, a, b);
      for (Index i = 0; i < m; ++i)
        for (Index j = 0; j < m; ++j)
          if (i != j) e += k * y(a, i) * y(b, j);
    }
  }
  const CliqueSet& cl = model.cliques();
  for (Index p = 0; p < cl.size(); ++p) {
    for (Index i = 0; i < m; ++i) {
      double off = 0;
      for (int a : cl.members(p)) off += 1.0 - y(a, i);
      e += cl.cost(p) * z(p, i) + (1.0 - z(p, i)) * cl.cost(p) * off;
    }
    e -= static_cast<double>(m - 1) * cl.cost(p);
  }
  return e;
}

double reference_lp_objective(const CrfModel& model, const Matrix& y) {
  const Index n = model.n_pixels(), m = model.n_labels();
  double e = 0;
  for (Index a = 0; a < n; ++a)
    for (Index i = 0; i < m; ++i) e += model.unaries()(a, i) * y(a, i);
  for (Index a = 0; a < n; ++a) {
    for (Index b = 0; b < n; ++b) {
      if (a == b) continue;
      double k = pair_weight(model, a, b);
      for (Index i = 0; i < m; ++i) e += k * std::abs(y(a, i) - y(b, i)) / 2.0;
    }
  }
  const CliqueSet& cl = model.cliques();
  for (Index p = 0; p < cl.size(); ++p) {
    double worst = 0;
    for (Index i = 0; i < m; ++i)
      for (int c : cl.members(p))
        for (int d : cl.members(p)) worst = std::max(worst, std::abs(y(c, i) - y(d, i)));
    e += cl.cost(p) * worst;
  }
  return e;
}

MapResult exhaustive_map(const CrfModel& model, const OracleBudget& budget) {
  const Index n = model.n_pixels(), m = model.n_labels();
  check_pixels(n, budget);
  if (m > budget.max_labels) throw BudgetExceeded("exhaustive_map: M exceeds budget");
  for (Index p = 0; p < model.cliques().size(); ++p) {
    if (static_cast<Index>(model.cliques().members(p).size()) > budget.max_clique)
      throw BudgetExceeded("exhaustive_map: clique exceeds budget");
  }
  if (std::pow(static_cast<double>(m), static_cast<double>(n)) > budget.max_states)
    throw BudgetExceeded("exhaustive_map: M^N exceeds budget");
  std::vector<int> x(static_cast<std::size_t>(n), 0);
  MapResult best{x, std::numeric_limits<double>::infinity()};
  while (true) {
    double e = reference_energy(model, x);
    if (e < best.energy) best = {x, e};
    Index pos = 0;
    while (pos < n && ++x[pos] == m) x[pos++] = 0;
    if (pos == n) break;
  }
  return best;
}

std::vector<double> fd_gradient(const Objective& f, std::span<const double> point, double eps) {
  std::vector<double> x(point.begin(), point.end()), g(point.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    double orig = x[i];
    x[i] = orig + eps;
    double up = f(x);
    x[i] = orig - eps;
    double down = f(x);
    x[i] = orig;
    g[i] = (up - down) / (2.0 * eps);
  }
  return g;
}

double grid_step_search(const std::function<double(double)>& f, int resolution) {
  if (resolution < 2) throw InvalidInput("grid_step_search: resolution must be >= 2");
  double best = 0, best_value = std::numeric_limits<double>::infinity();
  for (int k = 0; k < resolution; ++k) {
    double d = static_cast<double>(k) / (resolution - 1);
    double v = f(d);
    if (v < best_value) {
      best_value = v;
      best = d;
    }
  }
  return best;
}

std::vector<double> reference_simplex_projection(std::span<const double> v) {
  const std::size_t m = v.size();
  if (m == 0 || m > 20) throw BudgetExceeded("reference_simplex_projection: size out of range");
  std::vector<double> best;
  double best_dist = std::numeric_limits<double>::infinity();
  for (unsigned mask = 1; mask < (1u << m); ++mask) {
    double sum = 0;
    int count = 0;
    for (std::size_t i = 0; i < m; ++i)
      if (mask >> i & 1u) {
        sum += v[i];
        ++count;
      }
    double theta = (sum - 1.0) / count;
    std::vector<double> w(m, 0.0);
    bool ok = true;
    for (std::size_t i = 0; i < m; ++i) {
      if (mask >> i & 1u) {
        w[i] = v[i] - theta;
        if (w[i] < -1e-14) ok = false;
      }
    }
    if (!ok) continue;
    double dist = 0;
    for (std::size_t i = 0; i < m; ++i) dist += (w[i] - v[i]) * (w[i] - v[i]);
    if (dist < best_dist) {
      best_dist = dist;
      best = w;
    }
  }
  for (double& w : best) w = std::max(w, 0.0);
  return best;
}

std::vector<double> reference_nonneg_qp(const Matrix& q, std::span<const double> h) {
  const Index m = q.rows();
  if (q.cols() != m || static_cast<Index>(h.size()) != m) throw InvalidInput("reference_nonneg_qp: dimension mismatch");
  if (m > 20) throw BudgetExceeded("reference_nonneg_qp: too many variables");
  Eigen::VectorXd hv(m);
  for (Index i = 0; i < m; ++i) hv[i] = h[i];
  std::vector<double> best;
  double best_value = std::numeric_limits<double>::infinity();
  for (unsigned mask = 0; mask < (1u << m); ++mask) {
    std::vector<Index> s;
    for (Index i = 0; i < m; ++i)
      if (mask >> i & 1u) s.push_back(i);
    Eigen::VectorXd x = Eigen::VectorXd::Zero(m);
    if (!s.empty()) {
      Eigen::MatrixXd qs(s.size(), s.size());
      Eigen::VectorXd hs(s.size());
      for (std::size_t r = 0; r < s.size(); ++r) {
        hs[r] = hv[s[r]];
        for (std::size_t c = 0; c < s.size(); ++c) qs(r, c) = q(s[r], s[c]);
      }
      Eigen::FullPivLU<Eigen::MatrixXd> lu(qs);
      if (!lu.isInvertible()) continue;
      Eigen::VectorXd xs = lu.solve(hs);
      bool ok = true;
      for (std::size_t r = 0; r < s.size(); ++r) {
        if (xs[r] < -1e-12) ok = false;
        x[s[r]] = std::max(xs[r], 0.0);
      }
      if (!ok) continue;
    }
    Eigen::VectorXd grad = Eigen::MatrixXd(q) * x - hv;
    bool kkt = true;
    for (Index i = 0; i < m; ++i)
      if (!(mask >> i & 1u) && grad[i] < -1e-10) kkt = false;
    if (!kkt) continue;
    double value = 0.5 * x.dot(Eigen::MatrixXd(q) * x) - hv.dot(x);
    if (value < best_value) {
      best_value = value;
      best.assign(x.data(), x.data() + m);
    }
  }
  if (best.empty()) throw InvalidInput("reference_nonneg_qp: no bounded optimum");
  return best;
}

}  // namespace dcrf::oracle
