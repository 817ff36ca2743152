#include "dcrf/lattice.hpp"

#include "dcrf/parallel.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>

namespace dcrf {

namespace {

// Open-addressing table from integer lattice keys to dense vertex ids.
class KeyTable {
 public:
  explicit KeyTable(int d, std::size_t expected) : d_(d) {
    std::size_t cap = 64;
    while (cap < 2 * expected) cap <<= 1;
    slots_.assign(cap, -1);
  }

  int find(const int* key) const {
    std::size_t mask = slots_.size() - 1;
    for (std::size_t h = hash(key) & mask;; h = (h + 1) & mask) {
      int id = slots_[h];
      if (id < 0) return -1;
      if (std::equal(key, key + d_, keys_.begin() + static_cast<std::ptrdiff_t>(id) * d_)) return id;
    }
  }

  int insert(const int* key) {
    if (2 * (size() + 1) > slots_.size()) grow();
    std::size_t mask = slots_.size() - 1;
    for (std::size_t h = hash(key) & mask;; h = (h + 1) & mask) {
      int id = slots_[h];
      if (id < 0) {
        id = static_cast<int>(size());
        keys_.insert(keys_.end(), key, key + d_);
        slots_[h] = id;
        return id;
      }
      if (std::equal(key, key + d_, keys_.begin() + static_cast<std::ptrdiff_t>(id) * d_)) return id;
    }
  }

  std::size_t size() const { return keys_.size() / static_cast<std::size_t>(d_); }
  const int* key(int id) const { return keys_.data() + static_cast<std::ptrdiff_t>(id) * d_; }

 private:
  std::size_t hash(const int* key) const {
    std::uint64_t h = 0;
    for (int i = 0; i < d_; ++i) {
      h += static_cast<std::uint64_t>(static_cast<std::int64_t>(key[i]));
      h *= 2531011ULL;
    }
    return static_cast<std::size_t>(h ^ (h >> 29));
  }

  void grow() {
    std::vector<int> old(slots_.size() * 2, -1);
    slots_.swap(old);
    std::size_t mask = slots_.size() - 1;
    for (int id = 0; id < static_cast<int>(size()); ++id) {
      std::size_t h = hash(key(id)) & mask;
      while (slots_[h] >= 0) h = (h + 1) & mask;
      slots_[h] = id;
    }
  }

  int d_;
  std::vector<int> keys_;
  std::vector<int> slots_;
};

// Per-thread buffers reused across filter calls.
std::vector<double>& workspace(int slot) {
  thread_local std::array<std::vector<double>, 2> pool;
  return pool[slot];
}

}  // namespace

int level_bin(double level, int n_bins, Comparison cmp) {
  double scaled = level * (n_bins - 1);
  int bin = cmp == Comparison::GreaterEqual ? static_cast<int>(std::floor(scaled))
                                            : static_cast<int>(std::ceil(scaled));
  return std::clamp(bin, 0, n_bins - 1);
}

PermutohedralLattice::PermutohedralLattice(const Matrix& features) {
  n_ = features.rows();
  d_ = static_cast<int>(features.cols());
  if (n_ < 1 || d_ < 1) throw InvalidInput("build_lattice: need at least one point and one dimension");
  if (!features.allFinite()) throw InvalidInput("build_lattice: non-finite features");

  const int d = d_;
  const int dp1 = d + 1;
  std::vector<double> scale(d);
  const double inv_std = std::sqrt(2.0 / 3.0) * dp1;
  for (int i = 0; i < d; ++i) scale[i] = inv_std / std::sqrt((i + 1.0) * (i + 2.0));

  std::vector<int> canonical(dp1 * dp1);
  for (int i = 0; i <= d; ++i) {
    for (int j = 0; j <= d - i; ++j) canonical[i * dp1 + j] = i;
    for (int j = d - i + 1; j <= d; ++j) canonical[i * dp1 + j] = i - dp1;
  }

  KeyTable table(d, static_cast<std::size_t>(n_) * dp1);
  offsets_.resize(static_cast<std::size_t>(n_) * dp1);
  barycentric_.resize(static_cast<std::size_t>(n_) * dp1);

  std::vector<double> elevated(dp1), bary(d + 2);
  std::vector<int> rem0(dp1), rank(dp1), key(dp1);
  for (Index p = 0; p < n_; ++p) {
    double sm = 0;
    for (int j = d; j > 0; --j) {
      double cf = features(p, j - 1) * scale[j - 1];
      elevated[j] = sm - j * cf;
      sm += cf;
    }
    elevated[0] = sm;

    int sum = 0;
    for (int i = 0; i <= d; ++i) {
      int rd = static_cast<int>(std::lround(elevated[i] / dp1));
      rem0[i] = rd * dp1;
      sum += rd;
    }
    std::fill(rank.begin(), rank.end(), 0);
    for (int i = 0; i < d; ++i) {
      double di = elevated[i] - rem0[i];
      for (int j = i + 1; j <= d; ++j) {
        if (di < elevated[j] - rem0[j]) ++rank[i]; else ++rank[j];
      }
    }
    for (int i = 0; i <= d; ++i) {
      rank[i] += sum;
      if (rank[i] < 0) {
        rank[i] += dp1;
        rem0[i] += dp1;
      } else if (rank[i] > d) {
        rank[i] -= dp1;
        rem0[i] -= dp1;
      }
    }
    std::fill(bary.begin(), bary.end(), 0.0);
    for (int i = 0; i <= d; ++i) {
      double v = (elevated[i] - rem0[i]) / dp1;
      bary[d - rank[i]] += v;
      bary[d - rank[i] + 1] -= v;
    }
    bary[0] += 1.0 + bary[d + 1];

    for (int r = 0; r <= d; ++r) {
      for (int i = 0; i < d; ++i) key[i] = rem0[i] + canonical[r * dp1 + rank[i]];
      std::size_t at = static_cast<std::size_t>(p) * dp1 + r;
      offsets_[at] = table.insert(key.data());
      barycentric_[at] = std::max(0.0, bary[r]);
    }
    // Rounding can leave tiny negative weights; renormalize after clipping.
    double total = 0;
    for (int r = 0; r <= d; ++r) total += barycentric_[static_cast<std::size_t>(p) * dp1 + r];
    for (int r = 0; r <= d; ++r) barycentric_[static_cast<std::size_t>(p) * dp1 + r] /= total;
  }

  n_vertices_ = static_cast<Index>(table.size());
  const int absent = static_cast<int>(n_vertices_);
  neighbors_.assign(static_cast<std::size_t>(dp1) * n_vertices_ * 2, absent);
  std::vector<int> n1(dp1), n2(dp1);
  for (int j = 0; j <= d; ++j) {
    for (int v = 0; v < absent; ++v) {
      const int* k = table.key(v);
      for (int i = 0; i < d; ++i) {
        n1[i] = k[i] - 1;
        n2[i] = k[i] + 1;
      }
      if (j < d) {
        n1[j] = k[j] + d;
        n2[j] = k[j] - d;
      }
      int a = table.find(n1.data());
      int b = table.find(n2.data());
      std::size_t at = (static_cast<std::size_t>(j) * n_vertices_ + v) * 2;
      neighbors_[at] = a < 0 ? absent : a;
      neighbors_[at + 1] = b < 0 ? absent : b;
    }
  }

  // With the (1,2,1)/4 blur this reproduces the usual 1/(1 + 2^-d) normalization.
  slice_scale_ = std::ldexp(1.0, dp1) / (1.0 + std::ldexp(1.0, -d));
}

std::span<const int> PermutohedralLattice::vertices(Index point) const {
  return {offsets_.data() + point * (d_ + 1), static_cast<std::size_t>(d_ + 1)};
}

std::span<const double> PermutohedralLattice::weights(Index point) const {
  return {barycentric_.data() + point * (d_ + 1), static_cast<std::size_t>(d_ + 1)};
}

void PermutohedralLattice::blur_planes(std::vector<double>& planes, int channels, Execution exec) const {
  // The axis blurs do not commute on a sparse lattice; averaging both axis orders keeps the
  // operator symmetric.
  const Index nv = n_vertices_;
  const std::size_t plane = static_cast<std::size_t>(nv) + 1;
  std::vector<double>& work = workspace(1);
  work.assign(3 * plane, 0.0);
  auto pass = [&](double*& data, double*& spare, int j) {
    const int* nb = neighbors_.data() + static_cast<std::size_t>(j) * nv * 2;
    const double* src = data;
    double* dst = spare;
    parallel_for(0, nv, exec, [&](Index v) {
      dst[v] = 0.5 * src[v] + 0.25 * (src[nb[2 * v]] + src[nb[2 * v + 1]]);
    });
    std::swap(data, spare);
  };
  for (int c = 0; c < channels; ++c) {
    double* base = planes.data() + c * plane;
    std::copy(base, base + plane, work.data());
    double* a = base;
    double* sa = work.data() + plane;
    for (int j = 0; j <= d_; ++j) pass(a, sa, j);
    double* b = work.data();
    double* sb = work.data() + 2 * plane;
    for (int j = d_; j >= 0; --j) pass(b, sb, j);
    if (a != base) std::copy(a, a + nv, base);
    parallel_for(0, nv, exec, [&](Index v) { base[v] = 0.5 * (base[v] + b[v]); });
  }
}

Vector PermutohedralLattice::self_response() const {
  // Vertices of one simplex are joined only by paths that move in a single direction along a
  // subset of axes, so a walk over the 2^(d+1) subsets in each direction finds every path.
  const int dp1 = d_ + 1;
  const int absent = static_cast<int>(n_vertices_);
  Vector diag(n_);
  std::vector<std::pair<int, double>> frontier, next;
  for (Index p = 0; p < n_; ++p) {
    const int* ids = offsets_.data() + p * dp1;
    const double* w = barycentric_.data() + p * dp1;
    double acc = 0;
    for (int src = 0; src < dp1; ++src) {
      for (int dir = 0; dir < 2; ++dir) {
        frontier.assign(1, {ids[src], 1.0});
        for (int j = 0; j <= d_; ++j) {
          next.clear();
          const int* nb = neighbors_.data() + static_cast<std::size_t>(j) * n_vertices_ * 2;
          for (auto [v, val] : frontier) {
            next.emplace_back(v, 0.5 * val);
            int u = nb[2 * v + dir];
            if (u != absent) next.emplace_back(u, 0.25 * val);
          }
          frontier.swap(next);
        }
        for (std::size_t leaf = 0; leaf < frontier.size(); ++leaf) {
          auto [v, val] = frontier[leaf];
          // The all-stay path is shared by both directions.
          if (dir == 1 && leaf == 0) continue;
          for (int dst = 0; dst < dp1; ++dst) {
            if (ids[dst] == v) acc += w[dst] * w[src] * val;
          }
        }
      }
    }
    diag[p] = acc * slice_scale_;
  }
  return diag;
}

Matrix PermutohedralLattice::filter(const Matrix& values, Execution exec) const {
  if (values.rows() != n_) throw InvalidInput("filter: value rows do not match lattice points");
  const int k = static_cast<int>(values.cols());
  const int dp1 = d_ + 1;
  Matrix out = Matrix::Zero(n_, k);
  if (k == 0) return out;

  // Channels go through in small blocks so that the scattered splat and slice stay in cache.
  constexpr int block = 4;
  const Index plane = n_vertices_ + 1;
  std::vector<double>& buf = workspace(0);
  for (int c0 = 0; c0 < k; c0 += block) {
    const int nc = std::min(block, k - c0);
    buf.assign(static_cast<std::size_t>(plane) * nc, 0.0);
    for (Index p = 0; p < n_; ++p) {
      const double* v = values.data() + p * k + c0;
      for (int r = 0; r < dp1; ++r) {
        double w = barycentric_[p * dp1 + r];
        double* dst = buf.data() + offsets_[p * dp1 + r];
        for (int c = 0; c < nc; ++c) dst[c * plane] += w * v[c];
      }
    }
    blur_planes(buf, nc, exec);
    parallel_for(0, n_, exec, [&](Index p) {
      double* o = out.data() + p * k + c0;
      for (int r = 0; r < dp1; ++r) {
        double w = barycentric_[p * dp1 + r] * slice_scale_;
        const double* src = buf.data() + offsets_[p * dp1 + r];
        for (int c = 0; c < nc; ++c) o[c] += w * src[c * plane];
      }
    });
  }
  return out;
}

Vector PermutohedralLattice::filter_ordered(const Vector& values, const Vector& levels,
                                            const OrderedFilterConfig& cfg, Execution exec) const {
  if (cfg.n_bins < 2) throw InvalidInput("filter_ordered: need at least 2 bins");
  if (values.size() != n_ || levels.size() != n_)
    throw InvalidInput("filter_ordered: values/levels length does not match lattice points");
  for (Index p = 0; p < n_; ++p) {
    if (!(levels[p] >= 0.0 && levels[p] <= 1.0))
      throw InvalidInput("filter_ordered: levels must lie in [0,1]");
  }
  const int h = cfg.n_bins;
  const int dp1 = d_ + 1;
  std::vector<int> bins(static_cast<std::size_t>(n_));
  for (Index p = 0; p < n_; ++p) bins[p] = level_bin(levels[p], h, cfg.comparison);

  const Index plane = n_vertices_ + 1;
  std::vector<double>& buf = workspace(0);
  buf.assign(static_cast<std::size_t>(plane) * h, 0.0);
  for (Index p = 0; p < n_; ++p) {
    double* dst = buf.data() + bins[p] * plane;
    for (int r = 0; r < dp1; ++r) dst[offsets_[p * dp1 + r]] += barycentric_[p * dp1 + r] * values[p];
  }
  // Cumulate over bins so that slicing at bin q collects every point on the right side of q.
  const bool upward = cfg.comparison == Comparison::GreaterEqual;
  for (int step = 1; step < h; ++step) {
    int q = upward ? step : h - 1 - step;
    double* cur = buf.data() + q * plane;
    const double* prev = buf.data() + (upward ? q - 1 : q + 1) * plane;
    parallel_for(0, n_vertices_, exec, [&](Index v) { cur[v] += prev[v]; });
  }
  blur_planes(buf, h, exec);
  Vector out(n_);
  parallel_for(0, n_, exec, [&](Index p) {
    const double* src = buf.data() + bins[p] * plane;
    double acc = 0;
    for (int r = 0; r < dp1; ++r) acc += barycentric_[p * dp1 + r] * src[offsets_[p * dp1 + r]];
    out[p] = acc * slice_scale_;
  });
  return out;
}

PermutohedralLattice build_lattice(const Matrix& features) { return PermutohedralLattice(features); }

Matrix filter(const PermutohedralLattice& lat, const Matrix& values, Execution exec) {
  return lat.filter(values, exec);
}

Vector filter_ordered(const PermutohedralLattice& lat, const Vector& values, const Vector& levels,
                      const OrderedFilterConfig& cfg, Execution exec) {
  return lat.filter_ordered(values, levels, cfg, exec);
}

}  // namespace dcrf
