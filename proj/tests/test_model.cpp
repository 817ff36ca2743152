#include "dcrf/model.hpp"
#include "dcrf/oracle.hpp"
#include "dcrf/pairwise.hpp"
#include "helpers.hpp"

#include <doctest.h>

#include <cmath>

using namespace dcrf;

TEST_SUITE("model") {

TEST_CASE("discrete energy of a single pixel is its unary") {
  Matrix phi(1, 2);
  phi << 0, 1;
  CrfModel model = testing::identical_pixel_model(phi, 0.0);
  CHECK(discrete_energy(model, {{0}}) == 0.0);
  CHECK(discrete_energy(model, {{1}}) == 1.0);
}

TEST_CASE("Potts counts both ordered pairs") {
  CrfModel model = testing::identical_pixel_model(Matrix::Zero(2, 2), 1.0);
  CHECK(model.kernel_value(0, 1) == doctest::Approx(1.0));
  CHECK(discrete_energy(model, {{0, 0}}) == 0.0);
  CHECK(discrete_energy(model, {{0, 1}}) == doctest::Approx(2.0));
}

TEST_CASE("energy matches the term-by-term oracle on every labeling") {
  std::mt19937_64 rng(1);
  RgbImage img = testing::random_image(rng, 2, 2);
  std::vector<KernelSpec> specs = {{0.8, {1.5, 40.0}, FeatureKind::Bilateral}, {0.5, {1.0}, FeatureKind::Spatial}};
  CliqueSet cl(4, {{0, 1, 2, 3}}, {1.3});
  CrfModel model = CrfModel::from_image(img, testing::random_matrix(rng, 4, 3, 0, 2), specs, cl);
  DensePairwise op(model);
  for (int code = 0; code < 81; ++code) {
    std::vector<int> x(4);
    for (int a = 0, c = code; a < 4; ++a, c /= 3) x[a] = c % 3;
    double ref = oracle::reference_energy(model, x);
    CHECK(discrete_energy(model, {x}) == doctest::Approx(ref).epsilon(1e-12));
    CHECK(discrete_energy(model, op, {x}) == doctest::Approx(ref).epsilon(1e-12));
  }
}

TEST_CASE("clique cost") {
  CHECK(clique_cost(0.0, 5.0, 1.0) == doctest::Approx(5.0));
  CHECK(clique_cost(3.7, 0.0, 2.0) == 0.0);
  CHECK(clique_cost(109.0 * std::log(2.0), 19.71, 109.0) == doctest::Approx(9.855).epsilon(1e-12));
}

TEST_CASE("colour variance is the channel mean of population variances") {
  RgbImage img{3, 1, {0, 10, 20, 30, 10, 20, 60, 10, 20}};
  // Red {0,30,60} has variance 600, green and blue are constant.
  std::vector<int> members = {0, 1, 2};
  CHECK(color_variance(img, members) == doctest::Approx(200.0));
}

TEST_CASE("clique set invariants") {
  CHECK_THROWS_AS(CliqueSet(5, {{0, 1}}, {1.0}), InvalidInput);
  CHECK_THROWS_AS(CliqueSet(6, {{0, 1, 2}, {2, 3, 4}}, {1.0, 1.0}), InvalidInput);
  CHECK_THROWS_AS(CliqueSet(4, {{0, 1, 2}}, {-1.0}), InvalidInput);
  CliqueSet ok(6, {{0, 1, 2}, {3, 4, 5}}, {1.0, 2.0});
  CHECK(ok.clique_of(4) == 1);

  RgbImage img{4, 1, std::vector<std::uint8_t>(12, 50)};
  std::vector<int> seg = {1, 1, 2, 2};
  CHECK(CliqueSet::from_segments(img, seg, 10.0, 1.0).size() == 0);
  std::vector<int> seg3 = {1, 1, 1, 0};
  CliqueSet one = CliqueSet::from_segments(img, seg3, 10.0, 1.0);
  REQUIRE(one.size() == 1);
  CHECK(one.cost(0) == doctest::Approx(10.0));
  CHECK(one.clique_of(3) == -1);
}

TEST_CASE("relaxed QP objective is tight at consistent vertices") {
  std::mt19937_64 rng(2);
  for (int t = 0; t < 5; ++t) {
    verify::SmallModelSpec spec;
    spec.clique_size = 4;
    CrfModel model = verify::random_small_model(rng, spec);
    for (int code = 0; code < 27; ++code) {
      DiscreteLabeling x{std::vector<int>(6)};
      for (int a = 0, c = code * 7; a < 6; ++a, c /= 3) x.x[a] = c % 3;
      RelaxedLabeling s = integral_labeling(model, x);
      CHECK(qp_objective(model, s) == doctest::Approx(discrete_energy(model, x)).epsilon(1e-12));
    }
  }
}

TEST_CASE("z all ones removes the coupling term") {
  std::mt19937_64 rng(3);
  verify::SmallModelSpec spec;
  spec.clique_size = 3;
  CrfModel model = verify::random_small_model(rng, spec);
  CrfModel plain(model.unaries(), model.kernels());
  Matrix y = verify::random_simplex_rows(rng, 6, 3);
  RelaxedLabeling s{y, Matrix::Ones(1, 3)};
  // c'1 = M C_p, less the (M-1) C_p offset.
  double expected = qp_objective(plain, {y, Matrix(0, 3)}) + model.cliques().cost(0);
  CHECK(qp_objective(model, s) == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("uniform y: naive and filtered pairwise terms agree after scale alignment") {
  std::mt19937_64 rng(4);
  RgbImage img = testing::ramp_image(rng, 8, 8);
  std::vector<KernelSpec> specs = {{1.0, {3.0, 20.0}, FeatureKind::Bilateral}};
  CrfModel model = CrfModel::from_image(img, Matrix::Zero(64, 3), specs);
  LatticePairwise lat(model);
  DensePairwise dense(model);
  Matrix probe = testing::random_matrix(rng, 64, 4);
  Matrix a = lat.apply(probe), b = dense.apply(probe);
  double scale = a.cwiseProduct(b).sum() / b.squaredNorm();
  RelaxedLabeling s{Matrix::Constant(64, 3, 1.0 / 3), Matrix(0, 3)};
  double naive = qp_objective(model, s), filtered = qp_objective(model, lat, s);
  CHECK(naive > 0);
  CHECK(std::abs(filtered / scale - naive) / naive < 0.15);
}

TEST_CASE("LP objective") {
  std::mt19937_64 rng(5);
  verify::SmallModelSpec spec;
  spec.clique_size = 3;
  CrfModel model = verify::random_small_model(rng, spec);
  DensePairwise op(model);
  DiscreteLabeling x{{0, 2, 1, 1, 0, 2}};
  CHECK(lp_objective(model, integral_labeling(model, x).y) == doctest::Approx(discrete_energy(model, x)).epsilon(1e-12));
  Matrix uniform = Matrix::Constant(6, 3, 1.0 / 3);
  CHECK(lp_objective(model, uniform) == doctest::Approx(model.unaries().sum() / 3).epsilon(1e-12));
  for (int t = 0; t < 5; ++t) {
    Matrix y = verify::random_simplex_rows(rng, 6, 3);
    double ref = oracle::reference_lp_objective(model, y);
    CHECK(lp_objective(model, y) == doctest::Approx(ref).epsilon(1e-12));
    CHECK(lp_objective(model, op, y) == doctest::Approx(ref).epsilon(1e-12));
  }
}

TEST_CASE("argmax rounding") {
  Matrix y(3, 3);
  y << 0, 1, 0, 0.2, 0.5, 0.3, 0.5, 0.5, 0;
  CHECK(round_argmax(y).x == std::vector<int>{1, 1, 0});
}

TEST_CASE("features") {
  RgbImage one{1, 1, {30, 60, 90}};
  Matrix f = compute_features(one, {1.0, {5.0, 3.0}, FeatureKind::Bilateral});
  REQUIRE(f.rows() == 1);
  CHECK(f(0, 0) == 0.0);
  CHECK(f(0, 1) == 0.0);
  CHECK(f(0, 2) == doctest::Approx(10.0));
  CHECK(f(0, 3) == doctest::Approx(20.0));
  CHECK(f(0, 4) == doctest::Approx(30.0));

  RgbImage two{2, 1, {7, 7, 7, 7, 7, 7}};
  Matrix g = compute_features(two, {1.0, {4.0, 3.0}, FeatureKind::Bilateral});
  CHECK((g.row(0) - g.row(1)).norm() == doctest::Approx(0.25));
}

TEST_CASE("kernel value equals the Gaussian written out in raw units") {
  std::mt19937_64 rng(6);
  RgbImage img = testing::random_image(rng, 4, 3);
  const double w1 = 2.5, w2 = 0.7, s1 = 3.0, s2 = 25.0, s3 = 1.5;
  CrfModel model = CrfModel::from_image(img, Matrix::Zero(12, 2),
                                        {{w1, {s1, s2}, FeatureKind::Bilateral}, {w2, {s3}, FeatureKind::Spatial}});
  for (Index a = 0; a < 12; ++a) {
    for (Index b = 0; b < 12; ++b) {
      double dp = std::pow(double(a % 4 - b % 4), 2) + std::pow(double(a / 4 - b / 4), 2);
      auto ca = img.color(a), cb = img.color(b);
      double dc = 0;
      for (int c = 0; c < 3; ++c) dc += (ca[c] - cb[c]) * (ca[c] - cb[c]);
      double k = w1 * std::exp(-dp / (2 * s1 * s1) - dc / (2 * s2 * s2)) + w2 * std::exp(-dp / (2 * s3 * s3));
      CHECK(model.kernel_value(a, b) == doctest::Approx(k).epsilon(1e-12));
    }
  }
}

TEST_CASE("row stochastic check") {
  Matrix y(2, 2);
  y << 0.5, 0.5, 1.0, 0.0;
  CHECK(is_row_stochastic(y, 1e-12));
  y(1, 1) = 1e-6;
  CHECK_FALSE(is_row_stochastic(y, 1e-9));
}

}
