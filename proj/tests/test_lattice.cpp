#include "dcrf/lattice.hpp"
#include "dcrf/oracle.hpp"
#include "dcrf/pairwise.hpp"
#include "helpers.hpp"

#include <doctest.h>

#include <algorithm>
#include <set>

using namespace dcrf;

namespace {

Matrix image_features(std::mt19937_64& rng, int w, int h, double s1, double s2) {
  RgbImage img = testing::ramp_image(rng, w, h);
  return compute_features(img, {1.0, {s1, s2}, FeatureKind::Bilateral});
}

}  // namespace

TEST_SUITE("lattice") {

TEST_CASE("single point") {
  Matrix f(1, 5);
  f << 0.3, -1.2, 4.0, 2.2, 0.1;
  PermutohedralLattice lat(f);
  CHECK(lat.n_vertices() == 6);
  auto w = lat.weights(0);
  double sum = 0;
  for (double x : w) sum += x;
  CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("identical features share one simplex") {
  Matrix f = Matrix::Constant(7, 5, 0.37);
  PermutohedralLattice lat(f);
  CHECK(lat.n_vertices() == 6);
  auto v0 = lat.vertices(0);
  std::set<int> first(v0.begin(), v0.end());
  for (Index p = 1; p < 7; ++p) {
    auto vp = lat.vertices(p);
    CHECK(std::set<int>(vp.begin(), vp.end()) == first);
  }
}

TEST_CASE("barycentric weights sum to one") {
  std::mt19937_64 rng(11);
  PermutohedralLattice lat(testing::random_matrix(rng, 50, 5, -3, 3));
  for (Index p = 0; p < 50; ++p) {
    double sum = 0;
    for (double x : lat.weights(p)) {
      CHECK(x >= 0.0);
      sum += x;
    }
    CHECK(std::abs(sum - 1.0) < 1e-12);
  }
}

TEST_CASE("filter is linear and maps zero to zero") {
  std::mt19937_64 rng(12);
  PermutohedralLattice lat(image_features(rng, 6, 6, 3, 15));
  CHECK(testing::max_abs(lat.filter(Matrix::Zero(36, 3))) == 0.0);
  Matrix u = testing::random_matrix(rng, 36, 1), v = testing::random_matrix(rng, 36, 1);
  Matrix lhs = lat.filter(2.0 * u + 3.0 * v), rhs = 2.0 * lat.filter(u) + 3.0 * lat.filter(v);
  CHECK(testing::max_abs(lhs - rhs) < 1e-12);
}

TEST_CASE("filter is symmetric") {
  std::mt19937_64 rng(13);
  PermutohedralLattice lat(image_features(rng, 7, 5, 2, 10));
  Matrix u = testing::random_matrix(rng, 35, 1), v = testing::random_matrix(rng, 35, 1);
  double a = u.col(0).dot(lat.filter(v).col(0)), b = lat.filter(u).col(0).dot(v.col(0));
  CHECK(std::abs(a - b) < 1e-12 * std::abs(a));
}

TEST_CASE("identical features give the total up to a common scale") {
  std::mt19937_64 rng(14);
  Matrix f = Matrix::Constant(9, 5, 1.1);
  PermutohedralLattice lat(f);
  Matrix v = testing::random_matrix(rng, 9, 1);
  Matrix out = lat.filter(v);
  double ratio = out(0, 0) / v.sum();
  CHECK(ratio > 0.0);
  for (Index a = 0; a < 9; ++a) CHECK(out(a, 0) / v.sum() == doctest::Approx(ratio).epsilon(1e-12));
}

TEST_CASE("filter approximates the naive Gaussian sum on N = 64") {
  std::mt19937_64 rng(15);
  for (int t = 0; t < 5; ++t) {
    Matrix f = image_features(rng, 8, 8, 2.0 + t, 10.0 + 5 * t);
    PermutohedralLattice lat(f);
    Matrix v = testing::random_matrix(rng, 64, 2);
    Matrix a = lat.filter(v), b = oracle::naive_gaussian_sum(f, v);
    double s = a.cwiseProduct(b).sum() / a.squaredNorm();
    CHECK((s * a - b).norm() / b.norm() < 0.15);
  }
}

TEST_CASE("scale factor with the cross-validated bilateral bandwidths approaches 0.6") {
  verify::Scene scene = verify::synthetic_scene(64, 64, 3, 7);
  Matrix f = compute_features(scene.image, {1.0, {48.73, 6.52}, FeatureKind::Bilateral});
  PermutohedralLattice lat(f);
  Matrix v = Matrix::Ones(f.rows(), 1);
  Matrix a = lat.filter(v), b = oracle::naive_gaussian_sum(f, v);
  double scale = a.cwiseProduct(b).sum() / b.squaredNorm();
  MESSAGE("lattice / exact scale at N = 4096: " << scale);
  CHECK(scale == doctest::Approx(0.6).epsilon(0.05));
}

TEST_CASE("self response equals the probed diagonal") {
  std::mt19937_64 rng(16);
  Matrix f = image_features(rng, 5, 4, 2, 12);
  PermutohedralLattice lat(f);
  Matrix gram = lat.filter(Matrix::Identity(20, 20));
  Vector self = lat.self_response();
  for (Index a = 0; a < 20; ++a) CHECK(self[a] == doctest::Approx(gram(a, a)).epsilon(1e-12));
}

TEST_CASE("level bins") {
  CHECK(level_bin(0.0, 16, Comparison::GreaterEqual) == 0);
  CHECK(level_bin(1.0, 16, Comparison::GreaterEqual) == 15);
  CHECK(level_bin(0.5, 16, Comparison::GreaterEqual) == 7);
  CHECK(level_bin(0.5, 16, Comparison::LessEqual) == 8);
  CHECK(level_bin(0.25, 5, Comparison::LessEqual) == 1);
  CHECK(level_bin(0.3, 5, Comparison::GreaterEqual) == 1);
  CHECK(level_bin(0.3, 5, Comparison::LessEqual) == 2);
}

TEST_CASE("ordered filter with equal levels equals the plain filter") {
  std::mt19937_64 rng(17);
  PermutohedralLattice lat(image_features(rng, 6, 5, 3, 20));
  Vector v = testing::random_matrix(rng, 30, 1).col(0);
  Vector plain = lat.filter(Matrix(v)).col(0);
  Vector ge = lat.filter_ordered(v, Vector::Zero(30), {16, Comparison::GreaterEqual});
  CHECK((ge - plain).cwiseAbs().maxCoeff() < 1e-12 * plain.cwiseAbs().maxCoeff());
  CHECK(lat.filter_ordered(Vector::Zero(30), Vector::Constant(30, 0.3), {}).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("ordered filter matches the bin-quantized naive sum on N = 32") {
  std::mt19937_64 rng(18);
  Matrix f = image_features(rng, 8, 4, 2.5, 15);
  PermutohedralLattice lat(f);
  Matrix gram = lat.filter(Matrix::Identity(32, 32));
  Vector v = testing::random_matrix(rng, 32, 1).col(0);
  Vector levels = testing::random_matrix(rng, 32, 1).col(0);
  for (Comparison cmp : {Comparison::GreaterEqual, Comparison::LessEqual}) {
    Vector got = lat.filter_ordered(v, levels, {16, cmp});
    Vector want = oracle::naive_ordered_sum(gram, v, levels, cmp, 16);
    CHECK((got - want).norm() / want.norm() < 1e-12);
    // Against the exact kernel only the filter approximation remains.
    Vector exact = oracle::naive_ordered_sum_features(f, v, levels, cmp, 16);
    double s = got.dot(exact) / got.squaredNorm();
    CHECK((s * got - exact).norm() / exact.norm() < 0.2);
  }
}

TEST_CASE("serial and parallel filtering agree exactly") {
  std::mt19937_64 rng(19);
  PermutohedralLattice lat(image_features(rng, 9, 7, 2, 10));
  Matrix v = testing::random_matrix(rng, 63, 5);
  CHECK(lat.filter(v, Execution::Serial) == lat.filter(v, Execution::Parallel));
  Vector l = testing::random_matrix(rng, 63, 1).col(0);
  CHECK(lat.filter_ordered(v.col(0), l, {}, Execution::Serial) == lat.filter_ordered(v.col(0), l, {}, Execution::Parallel));
}

TEST_CASE("invalid inputs") {
  PermutohedralLattice lat(Matrix::Zero(4, 2));
  CHECK_THROWS_AS(lat.filter(Matrix::Zero(3, 1)), InvalidInput);
  CHECK_THROWS_AS(lat.filter_ordered(Vector::Zero(4), Vector::Constant(4, 1.5), {}), InvalidInput);
}

TEST_CASE("Potts product removes the diagonal exactly") {
  std::mt19937_64 rng(20);
  RgbImage img = testing::ramp_image(rng, 5, 5);
  CrfModel model = CrfModel::from_image(img, Matrix::Zero(25, 3), {{1.0, {2.0, 20.0}, FeatureKind::Bilateral}});
  DensePairwise dense(model);
  Matrix v = verify::random_simplex_rows(rng, 25, 3);
  Matrix got = potts_product(dense, v);
  for (Index a = 0; a < 25; ++a) {
    for (Index i = 0; i < 3; ++i) {
      double ref = 0;
      for (Index b = 0; b < 25; ++b)
        if (b != a)
          for (Index j = 0; j < 3; ++j)
            if (j != i) ref += model.kernel_value(a, b) * v(b, j);
      CHECK(got(a, i) == doctest::Approx(ref).epsilon(1e-12));
    }
  }
  // The lattice version uses the lattice's own diagonal.
  LatticePairwise lat(model);
  Matrix gram = lat.apply(Matrix::Identity(25, 25));
  Matrix lat_got = potts_product(lat, v);
  for (Index a = 0; a < 25; ++a) {
    for (Index i = 0; i < 3; ++i) {
      double ref = 0;
      for (Index b = 0; b < 25; ++b)
        if (b != a)
          for (Index j = 0; j < 3; ++j)
            if (j != i) ref += gram(a, b) * v(b, j);
      CHECK(lat_got(a, i) == doctest::Approx(ref).epsilon(1e-10));
    }
  }
}

}
