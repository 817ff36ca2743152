#include "dcrf/oracle.hpp"
#include "dcrf/pairwise.hpp"
#include "dcrf/qp_solver.hpp"
#include "helpers.hpp"

#include <doctest.h>

#include <cmath>

using namespace dcrf;

TEST_SUITE("oracle") {

TEST_CASE("naive Gaussian sum") {
  Matrix one(1, 3);
  one << 0.5, 1.0, -2.0;
  Matrix v(1, 2);
  v << 3.0, -1.0;
  CHECK(oracle::naive_gaussian_sum(one, v) == v);

  Matrix same = Matrix::Constant(4, 2, 0.7);
  Matrix w(4, 1);
  w << 1, 2, 3, 4;
  CHECK(testing::max_abs(oracle::naive_gaussian_sum(same, w) - Matrix::Constant(4, 1, 10.0)) < 1e-14);

  Matrix line(3, 1);
  line << 0, 1, 2;
  Matrix u(3, 1);
  u << 1, 2, 3;
  const double e1 = std::exp(-0.5), e4 = std::exp(-2.0);
  Matrix out = oracle::naive_gaussian_sum(line, u);
  CHECK(out(0, 0) == doctest::Approx(1 + 2 * e1 + 3 * e4));
  CHECK(out(1, 0) == doctest::Approx(e1 + 2 + 3 * e1));
  CHECK(out(2, 0) == doctest::Approx(e4 + 2 * e1 + 3));
}

TEST_CASE("naive ordered sum") {
  Matrix line(3, 1);
  line << 0, 1, 2;
  Matrix k = oracle::gaussian_gram(line);
  Vector v(3);
  v << 1, 2, 3;
  Vector flat = Vector::Constant(3, 0.4);
  Vector diff = oracle::naive_ordered_sum(k, v, flat, Comparison::GreaterEqual) -
                oracle::naive_ordered_sum(k, v, flat, Comparison::LessEqual);
  CHECK(diff.cwiseAbs().maxCoeff() == 0.0);

  Vector rising(3);
  rising << 0.1, 0.5, 0.9;
  const double e1 = std::exp(-0.5), e4 = std::exp(-2.0);
  Vector ge = oracle::naive_ordered_sum(k, v, rising, Comparison::GreaterEqual);
  CHECK(ge[0] == doctest::Approx(1.0));
  CHECK(ge[1] == doctest::Approx(e1 + 2));
  CHECK(ge[2] == doctest::Approx(e4 + 2 * e1 + 3));
  Vector le = oracle::naive_ordered_sum(k, v, rising, Comparison::LessEqual);
  CHECK(le[0] == doctest::Approx(1 + 2 * e1 + 3 * e4));
  CHECK(le[2] == doctest::Approx(3.0));

  // With 3 bins, 0.5 and 0.9 share bin 1 under GreaterEqual.
  Vector binned = oracle::naive_ordered_sum(k, v, rising, Comparison::GreaterEqual, 3);
  CHECK(binned[0] == doctest::Approx(1.0));
  CHECK(binned[1] == doctest::Approx(2 + 4 * e1));
}

TEST_CASE("exhaustive MAP") {
  Matrix phi(3, 3);
  phi << 0.5, 0.1, 0.9, 0.2, 0.3, 0.0, 1.0, 0.8, 0.7;
  CrfModel unary = testing::identical_pixel_model(phi, 0.0);
  auto r = oracle::exhaustive_map(unary);
  CHECK(r.x == std::vector<int>{1, 2, 2});
  CHECK(r.energy == doctest::Approx(0.8));

  Matrix votes(5, 2);
  votes << 0, 1, 1, 0, 1, 0, 0, 1, 1, 0;
  CrfModel attract = testing::identical_pixel_model(votes, 10.0);
  CHECK(oracle::exhaustive_map(attract).x == std::vector<int>(5, 1));

  std::mt19937_64 rng(61);
  verify::SmallModelSpec spec;
  spec.clique_size = 4;
  CrfModel model = verify::random_small_model(rng, spec);
  DensePairwise op(model);
  double best = oracle::exhaustive_map(model).energy;
  CHECK(best <= oracle::reference_energy(model, round_argmax(qp_minimise(model, op).s.y).x) + 1e-12);

  CHECK_THROWS_AS(oracle::exhaustive_map(testing::identical_pixel_model(Matrix::Zero(13, 3), 0.0)), oracle::BudgetExceeded);
}

TEST_CASE("finite differences") {
  std::vector<double> c = {1.5, -2.0, 0.25};
  auto linear = [&](std::span<const double> x) { return c[0] * x[0] + c[1] * x[1] + c[2] * x[2]; };
  std::vector<double> at = {0.3, 4.0, -1.0};
  auto g = oracle::fd_gradient(linear, at);
  for (int i = 0; i < 3; ++i) CHECK(g[i] == doctest::Approx(c[i]).epsilon(1e-8));
  auto half_square = [](std::span<const double> x) { return 0.5 * x[0] * x[0]; };
  std::vector<double> two = {2.0};
  CHECK(oracle::fd_gradient(half_square, two)[0] == doctest::Approx(2.0).epsilon(1e-8));
}

TEST_CASE("fd gradient cross-checks the analytic QP gradient") {
  std::mt19937_64 rng(62);
  verify::SmallModelSpec spec;
  spec.clique_size = 3;
  CrfModel model = verify::random_small_model(rng, spec);
  DensePairwise op(model);
  Matrix y = verify::random_simplex_rows(rng, 6, 3), z = testing::random_matrix(rng, 1, 3);
  QpGradient g = qp_gradient(model, qp_make_state(model, op, {y, z}));
  std::vector<double> pt(y.data(), y.data() + 18);
  auto f = [&](std::span<const double> v) {
    Matrix yy(6, 3);
    std::copy(v.begin(), v.end(), yy.data());
    return oracle::reference_qp_objective(model, yy, z);
  };
  auto fd = oracle::fd_gradient(f, pt);
  for (int k = 0; k < 18; ++k) CHECK(std::abs(fd[k] - g.y.data()[k]) <= 1e-5 * std::abs(g.y.data()[k]) + 1e-9);
}

TEST_CASE("grid step search") {
  auto f = [](double d) { return (d - 0.3) * (d - 0.3); };
  CHECK(oracle::grid_step_search(f, 11) == doctest::Approx(0.3));
  CHECK(oracle::grid_step_search([](double d) { return -d; }, 1000) == 1.0);
}

TEST_CASE("nonnegative QP references") {
  Matrix q(2, 2);
  q << 0.5, -0.5, -0.5, 0.5;
  std::vector<double> unbounded = {1.0, 0.0};
  CHECK_THROWS(oracle::reference_nonneg_qp(q, unbounded));
  std::vector<double> v = {0.9, 0.8, -0.3};
  auto p = oracle::reference_simplex_projection(v);
  CHECK(p[0] == doctest::Approx(0.55));
  CHECK(p[1] == doctest::Approx(0.45));
  CHECK(p[2] == 0.0);
}

}
