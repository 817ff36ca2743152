#pragma once

#include "dcrf/types.hpp"

#include <array>
#include <cstdint>
#include <span>
#include <vector>

namespace dcrf {

class PairwiseOperator;

struct LabelSpace {
  Index n_pixels = 0;
  Index n_labels = 0;
};

enum class FeatureKind { Bilateral, Spatial };

// bandwidths: bilateral takes {sigma_position, sigma_color} or one value per feature
// dimension (5); spatial takes {sigma_position} or 2 values.
struct KernelSpec {
  double weight = 0.0;
  std::vector<double> bandwidths;
  FeatureKind kind = FeatureKind::Spatial;

  int feature_dimension() const { return kind == FeatureKind::Bilateral ? 5 : 2; }
  std::vector<double> per_dimension() const;
  void validate() const;
};

// Interleaved 8-bit RGB, row-major. Pixel a = y * width + x.
struct RgbImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;

  Index size() const { return static_cast<Index>(width) * height; }
  std::array<double, 3> color(Index a) const {
    const std::uint8_t* p = pixels.data() + 3 * a;
    return {double(p[0]), double(p[1]), double(p[2])};
  }
};

Matrix compute_features(const RgbImage& image, const KernelSpec& spec);

// One Gaussian kernel over pre-divided features: weight * exp(-|f_a - f_b|^2 / 2).
struct PairwiseTerm {
  double weight = 0.0;
  Matrix features;
};

double clique_cost(double variance, double gamma, double eta);

// Mean over the three channels of the per-channel population variance.
double color_variance(const RgbImage& image, std::span<const int> members);

class CliqueSet {
 public:
  CliqueSet() = default;
  CliqueSet(Index n_pixels, std::vector<std::vector<int>> members, std::vector<double> costs,
            std::vector<double> variances = {});

  // Segment ids per pixel, 0 = unassigned. Segments smaller than min_size are dropped.
  static CliqueSet from_segments(const RgbImage& image, std::span<const int> segments,
                                 double gamma, double eta, int min_size = 3);

  Index size() const { return static_cast<Index>(members_.size()); }
  bool empty() const { return members_.empty(); }
  Index n_pixels() const { return n_pixels_; }
  std::span<const int> members(Index p) const { return members_[p]; }
  double cost(Index p) const { return costs_[p]; }
  double variance(Index p) const { return variances_[p]; }
  // Clique of a pixel or -1.
  int clique_of(Index a) const { return assignment_.empty() ? -1 : assignment_[a]; }
  const std::vector<double>& costs() const { return costs_; }

 private:
  Index n_pixels_ = 0;
  std::vector<std::vector<int>> members_;
  std::vector<double> costs_;
  std::vector<double> variances_;
  std::vector<int> assignment_;
};

struct CliqueParams {
  double gamma = 0.0;
  double eta = 1.0;
};

enum class LabelCompat { Potts };

class CrfModel {
 public:
  CrfModel(Matrix unaries, std::vector<PairwiseTerm> kernels, CliqueSet cliques = {},
           CliqueParams params = {});

  static CrfModel from_image(const RgbImage& image, Matrix unaries,
                             const std::vector<KernelSpec>& specs, CliqueSet cliques = {},
                             CliqueParams params = {});

  const LabelSpace& space() const { return space_; }
  Index n_pixels() const { return space_.n_pixels; }
  Index n_labels() const { return space_.n_labels; }
  const Matrix& unaries() const { return unaries_; }
  const std::vector<PairwiseTerm>& kernels() const { return kernels_; }
  LabelCompat label_compat() const { return LabelCompat::Potts; }
  const CliqueSet& cliques() const { return cliques_; }
  const CliqueParams& clique_params() const { return params_; }

  // Sum of kernel weights, the value of K_aa.
  double self_weight() const;
  // Exact sum_m w_m k_m(f_a, f_b).
  double kernel_value(Index a, Index b) const;
  // (M - 1) * sum_p C_p, the constant separating the literal QP objective from the energy.
  double clique_offset() const;

 private:
  LabelSpace space_;
  Matrix unaries_;
  std::vector<PairwiseTerm> kernels_;
  CliqueSet cliques_;
  CliqueParams params_;
};

struct DiscreteLabeling {
  std::vector<int> x;
};

// y is N x M; z is R x M.
struct RelaxedLabeling {
  Matrix y;
  Matrix z;
};

bool is_row_stochastic(const Matrix& y, double tol);

// Per clique and label, sum over members of y (the product H y).
Matrix clique_sums(const CrfModel& model, const Matrix& y);

// One-hot y and the consistent z (z_{p:i} = 0 iff clique p is uniform at i).
RelaxedLabeling integral_labeling(const CrfModel& model, const DiscreteLabeling& x);

double discrete_energy(const CrfModel& model, const DiscreteLabeling& x);
double discrete_energy(const CrfModel& model, const PairwiseOperator& op, const DiscreteLabeling& x);

// phi'y + y'Psi y + c'z + (1-z)'CH(1-y), shifted by -(M-1) sum C_p so that it equals
// discrete_energy at consistent integral points.
double qp_objective(const CrfModel& model, const RelaxedLabeling& s);
double qp_objective(const CrfModel& model, const PairwiseOperator& op, const RelaxedLabeling& s);

double lp_objective(const CrfModel& model, const Matrix& y);
double lp_objective(const CrfModel& model, const PairwiseOperator& op, const Matrix& y);

DiscreteLabeling round_argmax(const Matrix& y);

}  // namespace dcrf
