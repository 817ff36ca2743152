#pragma once

#include "dcrf/model.hpp"
#include "dcrf/verify.hpp"

#include <random>

namespace testing {

inline dcrf::Matrix random_matrix(std::mt19937_64& rng, dcrf::Index rows, dcrf::Index cols, double lo = 0.0,
                                  double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  dcrf::Matrix m(rows, cols);
  for (dcrf::Index k = 0; k < m.size(); ++k) m.data()[k] = u(rng);
  return m;
}

inline dcrf::RgbImage random_image(std::mt19937_64& rng, int w, int h) {
  dcrf::RgbImage img{w, h, {}};
  std::uniform_int_distribution<int> u(0, 255);
  img.pixels.resize(static_cast<std::size_t>(3 * w * h));
  for (auto& p : img.pixels) p = static_cast<std::uint8_t>(u(rng));
  return img;
}

// Smooth colour ramp with mild noise, closer to a photograph than i.i.d. colours.
inline dcrf::RgbImage ramp_image(std::mt19937_64& rng, int w, int h) {
  dcrf::RgbImage img{w, h, {}};
  std::uniform_int_distribution<int> noise(-6, 6);
  img.pixels.resize(static_cast<std::size_t>(3 * w * h));
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      for (int c = 0; c < 3; ++c) {
        int v = 40 + 3 * x * (c + 1) + 4 * y + noise(rng);
        img.pixels[static_cast<std::size_t>(3 * (y * w + x) + c)] = static_cast<std::uint8_t>(std::clamp(v, 0, 255));
      }
  return img;
}

// Every pixel shares one feature vector, so K_ab = weight for all pairs.
inline dcrf::CrfModel identical_pixel_model(dcrf::Matrix unaries, double weight, dcrf::CliqueSet cliques = {}) {
  dcrf::Index n = unaries.rows();
  std::vector<dcrf::PairwiseTerm> kernels;
  kernels.push_back({weight, dcrf::Matrix::Zero(n, 2)});
  return dcrf::CrfModel(std::move(unaries), std::move(kernels), std::move(cliques));
}

inline double max_abs(const dcrf::Matrix& m) { return m.size() ? m.cwiseAbs().maxCoeff() : 0.0; }

}  // namespace testing
