#pragma once

#include "dcrf/model.hpp"

#include <cstdint>
#include <random>
#include <string>
#include <vector>

// Brute-force validation suites shared by `oracle-check` and the acceptance tests.
namespace dcrf::verify {

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
  double seconds = 0.0;
};

std::vector<std::string> suite_names();

// Throws InvalidInput for an unknown suite.
CheckResult run_suite(const std::string& name);

struct Scene {
  RgbImage image;
  std::vector<int> labels;
  Matrix unaries;
};

// Piecewise-smooth image with noisy unaries whose argmin is the true label most of the time.
Scene synthetic_scene(int width, int height, int n_labels, std::uint64_t seed);

struct SmallModelSpec {
  int width = 2;
  int height = 3;
  int n_labels = 3;
  int clique_size = 0;  // 0 = no clique
  double unary_scale = 2.0;
  double pairwise_scale = 1.0;
  double clique_scale = 1.0;
};

// Random colours, random bandwidths and weights, one optional clique over random pixels.
CrfModel random_small_model(std::mt19937_64& rng, const SmallModelSpec& spec);

// Rows drawn uniformly from the simplex.
Matrix random_simplex_rows(std::mt19937_64& rng, Index rows, Index cols);

}  // namespace dcrf::verify
