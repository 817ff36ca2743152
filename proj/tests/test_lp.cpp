#include "dcrf/lp_solver.hpp"
#include "dcrf/oracle.hpp"
#include "dcrf/pairwise.hpp"
#include "dcrf/qp_solver.hpp"
#include "helpers.hpp"

#include <doctest.h>

#include <numeric>

using namespace dcrf;

namespace {

LpDualState random_state(std::mt19937_64& rng, const CrfModel& model, double lambda) {
  LpDualState st = lp_initial_state(model, verify::random_simplex_rows(rng, model.n_pixels(), model.n_labels()), lambda);
  st.a_alpha = testing::random_matrix(rng, model.n_pixels(), model.n_labels(), -1, 1);
  st.u_mu = testing::random_matrix(rng, model.n_pixels(), model.n_labels(), -1, 1);
  st.gamma = testing::random_matrix(rng, model.n_pixels(), model.n_labels(), 0, 1);
  st.beta = testing::random_matrix(rng, model.n_pixels(), 1, -1, 1).col(0);
  st.y_tilde = recover_primal(model, st);
  return st;
}

// g written out term by term from the stored products.
double naive_dual(const CrfModel& model, const LpDualState& st) {
  double g = 0;
  for (Index a = 0; a < st.anchor.rows(); ++a) {
    for (Index i = 0; i < st.anchor.cols(); ++i) {
      double w = st.a_alpha(a, i) + st.u_mu(a, i) + st.beta[a] + st.gamma(a, i) - model.unaries()(a, i);
      g += 0.5 * st.lambda * w * w + w * st.anchor(a, i);
    }
    g -= st.beta[a];
  }
  return g;
}

double energy(const CrfModel& model, const Matrix& y) { return oracle::reference_energy(model, round_argmax(y).x); }

}  // namespace

TEST_SUITE("lp_solver") {

TEST_CASE("closed-form beta") {
  std::mt19937_64 rng(31);
  CrfModel zero = testing::identical_pixel_model(Matrix::Zero(3, 4), 0.0);
  CHECK(beta_optimal(zero, lp_initial_state(zero, Matrix::Constant(3, 4, 0.25), 0.1)).cwiseAbs().maxCoeff() == 0.0);

  Matrix phi(2, 3);
  phi << 2, 2, 2, -1, -1, -1;
  CrfModel flat_model = testing::identical_pixel_model(phi, 0.0);
  Vector beta = beta_optimal(flat_model, lp_initial_state(flat_model, Matrix::Constant(2, 3, 1.0 / 3), 0.1));
  CHECK(beta[0] == doctest::Approx(2.0));
  CHECK(beta[1] == doctest::Approx(-1.0));

  verify::SmallModelSpec spec;
  spec.width = 2;
  spec.height = 2;
  CrfModel model = verify::random_small_model(rng, spec);
  LpDualState st = random_state(rng, model, 0.3);
  st.beta = beta_optimal(model, st);
  for (Index a = 0; a < 4; ++a) {
    LpDualState up = st, down = st;
    up.beta[a] += 1e-6;
    down.beta[a] -= 1e-6;
    double d = (naive_dual(model, up) - naive_dual(model, down)) / 2e-6;
    CHECK(std::abs(d) < 1e-7);
  }
}

TEST_CASE("gamma subproblem") {
  std::vector<double> neg = {-0.5, -1.0, 0.0, -0.2};
  std::vector<double> init(4, 1e-3);
  std::vector<double> zero(4, 0.0);
  std::vector<double> g = gamma_qp_solve(neg, 0.7, 200, init);
  CHECK(gamma_qp_objective(g, neg, 0.7) <= gamma_qp_objective(zero, neg, 0.7) + 1e-8);

  std::vector<double> h = {1.0, -2.0};
  Matrix q(2, 2);
  q << 0.5, -0.5, -0.5, 0.5;
  std::vector<double> ref = oracle::reference_nonneg_qp(q, h);
  CHECK(ref[0] == doctest::Approx(2.0));
  CHECK(ref[1] == doctest::Approx(0.0));
  std::vector<double> start(2, 1e-3);
  std::vector<double> got = gamma_qp_solve(h, 1.0, 2000, start);
  CHECK(std::abs(got[0] - ref[0]) < 1e-5);
  CHECK(std::abs(got[1] - ref[1]) < 1e-5);
}

TEST_CASE("gamma updates never increase the objective") {
  std::mt19937_64 rng(32);
  std::uniform_real_distribution<double> u(-2, 2);
  for (int t = 0; t < 50; ++t) {
    std::vector<double> h(21);
    for (double& x : h) x = u(rng);
    double mean = std::accumulate(h.begin(), h.end(), 0.0) / 21;
    for (double& x : h) x -= mean + 1.0 / 21;
    double lambda = 0.05 + 0.1 * t;
    std::vector<double> init(21, 1e-3);
    double prev = 1e300;
    gamma_qp_solve(h, lambda, 100, init, 1e-6, [&](std::span<const double> g) {
      double cur = gamma_qp_objective(g, h, lambda);
      CHECK(cur <= prev + 1e-12 * std::abs(prev));
      prev = cur;
    });
  }
}

TEST_CASE("conditional gradient with constant y~") {
  std::mt19937_64 rng(33);
  verify::SmallModelSpec spec;
  spec.clique_size = 4;
  CrfModel model = verify::random_small_model(rng, spec);
  LatticePairwise op(model);
  LpDirection d = lp_conditional_gradient(model, op, Matrix::Constant(6, 3, 0.4));
  CHECK(testing::max_abs(d.a_s) == 0.0);
  CHECK(testing::max_abs(d.u_s) == 0.0);
}

TEST_CASE("A s matches the bin-quantized naive double sum") {
  std::mt19937_64 rng(34);
  RgbImage img = testing::ramp_image(rng, 4, 4);
  CrfModel model = CrfModel::from_image(img, Matrix::Zero(16, 3), {{1.7, {2.0, 20.0}, FeatureKind::Bilateral}});
  LatticePairwise op(model);
  Matrix gram = op.apply(Matrix::Identity(16, 16));
  Matrix yt = testing::random_matrix(rng, 16, 3, -1, 2);
  LpDirection d = lp_conditional_gradient(model, op, yt);
  for (Index i = 0; i < 3; ++i) {
    Vector col = yt.col(i);
    Vector levels = (col.array() - col.minCoeff()) / (col.maxCoeff() - col.minCoeff());
    Vector ones = Vector::Ones(16);
    Vector want = oracle::naive_ordered_sum(gram, ones, levels, Comparison::LessEqual, 16) -
                  oracle::naive_ordered_sum(gram, ones, levels, Comparison::GreaterEqual, 16);
    CHECK((d.a_s.col(i) - want).cwiseAbs().maxCoeff() < 1e-12 * gram.cwiseAbs().maxCoeff() * 16);
  }
}

TEST_CASE("U s picks the most negative clique move") {
  CliqueSet cl(3, {{0, 1, 2}}, {1.5});
  CrfModel model = testing::identical_pixel_model(Matrix::Zero(3, 2), 0.0, cl);
  DensePairwise op(model);
  Matrix yt(3, 2);
  yt << 0.1, 0.9, 0.6, 0.2, 0.3, 0.8;
  LpDirection d = lp_conditional_gradient(model, op, yt);
  CHECK((d.u_s.array() > 0).count() == 1);
  CHECK((d.u_s.array() < 0).count() == 1);
  CHECK(d.u_s.sum() == doctest::Approx(0.0));
  double value = d.u_s.cwiseProduct(yt).sum();
  CHECK(value == doctest::Approx(1.5 * (0.2 - 0.9)));
  for (Index i = 0; i < 2; ++i)
    for (Index a = 0; a < 3; ++a)
      for (Index b = 0; b < 3; ++b) CHECK(value <= 1.5 * (yt(a, i) - yt(b, i)) + 1e-15);
}

TEST_CASE("dual step size") {
  std::mt19937_64 rng(35);
  verify::SmallModelSpec spec;
  spec.clique_size = 3;
  CrfModel model = verify::random_small_model(rng, spec);
  LpDualState st = random_state(rng, model, 0.1);
  CHECK(lp_optimal_step(st, {st.a_alpha, st.u_mu}) == 0.0);

  LpDualState one = lp_initial_state(testing::identical_pixel_model(Matrix::Zero(1, 1), 0.0), Matrix::Ones(1, 1), 1.0);
  one.a_alpha(0, 0) = 1.0;
  one.y_tilde(0, 0) = 1.7;
  CHECK(lp_optimal_step(one, {Matrix::Zero(1, 1), Matrix::Zero(1, 1)}) == 1.0);

  for (int t = 0; t < 5; ++t) {
    CrfModel m = verify::random_small_model(rng, spec);
    DensePairwise op(m);
    LpDualState s = random_state(rng, m, 0.2);
    update_beta_gamma(m, s, {}, false);
    LpDirection dir = lp_conditional_gradient(m, op, s.y_tilde);
    double delta = lp_optimal_step(s, dir);
    auto along = [&](double x) {
      LpDualState moved = s;
      moved.a_alpha = s.a_alpha + x * (dir.a_s - s.a_alpha);
      moved.u_mu = s.u_mu + x * (dir.u_s - s.u_mu);
      return naive_dual(m, moved);
    };
    CHECK(along(delta) <= along(oracle::grid_step_search(along, 1001)) + 1e-9);
  }
}

TEST_CASE("simplex projection") {
  std::vector<double> in = {0.2, 0.3, 0.5};
  auto p = simplex_project(in);
  for (int i = 0; i < 3; ++i) CHECK(p[i] == doctest::Approx(in[i]).epsilon(1e-15));
  std::vector<double> two = {2.0, 0.0};
  CHECK(simplex_project(two) == std::vector<double>{1.0, 0.0});
  std::mt19937_64 rng(36);
  std::normal_distribution<double> nd(0, 1.5);
  for (int t = 0; t < 50; ++t) {
    std::vector<double> v(5);
    for (double& x : v) x = nd(rng);
    auto got = simplex_project(v), ref = oracle::reference_simplex_projection(v);
    for (int i = 0; i < 5; ++i) CHECK(std::abs(got[i] - ref[i]) < 1e-8);
  }
}

TEST_CASE("prox with no inner rounds returns the unary step") {
  std::mt19937_64 rng(37);
  verify::SmallModelSpec spec;
  CrfModel model = verify::random_small_model(rng, spec);
  DensePairwise op(model);
  Matrix yk = verify::random_simplex_rows(rng, 6, 3);
  LpOptions opts;
  opts.inner_iters = 0;
  Matrix expected = yk - opts.lambda * model.unaries();
  CHECK(testing::max_abs(prox_subproblem(model, op, yk, opts).y_tilde - expected) < 1e-15);
}

TEST_CASE("dual objective decreases over every block") {
  std::mt19937_64 rng(38);
  verify::SmallModelSpec spec;
  spec.width = 2;
  spec.height = 2;
  spec.clique_size = 3;
  CrfModel model = verify::random_small_model(rng, spec);
  DensePairwise op(model);
  Matrix yk = verify::random_simplex_rows(rng, 4, 3);
  LpOptions opts;
  opts.inner_iters = 30;
  double prev = naive_dual(model, lp_initial_state(model, yk, opts.lambda));
  prox_subproblem(model, op, yk, opts, [&](const LpDualState& st, LpBlock) {
    double cur = naive_dual(model, st);
    CHECK(dual_objective(model, st) == doctest::Approx(cur).epsilon(1e-12));
    CHECK(cur <= prev + 1e-6);
    prev = cur;
  });
}

TEST_CASE("without pairwise or cliques the prox point is the projected unary step") {
  std::mt19937_64 rng(39);
  Matrix phi = testing::random_matrix(rng, 5, 4, 0, 3);
  CrfModel model = testing::identical_pixel_model(phi, 0.0);
  DensePairwise op(model);
  Matrix yk = verify::random_simplex_rows(rng, 5, 4);
  LpOptions opts;
  opts.lambda = 0.5;
  opts.inner_iters = 40;
  opts.gamma_iters = 200;
  Matrix yt = prox_subproblem(model, op, yk, opts).y_tilde;
  for (Index a = 0; a < 5; ++a) {
    std::vector<double> v(4);
    for (Index i = 0; i < 4; ++i) v[i] = yk(a, i) - opts.lambda * phi(a, i);
    auto ref = oracle::reference_simplex_projection(v);
    for (Index i = 0; i < 4; ++i) CHECK(std::abs(yt(a, i) - ref[i]) < 1e-4);
  }
}

TEST_CASE("unary-only LP reaches the argmin vertex") {
  Matrix phi(3, 3);
  phi << 0.1, 0.5, 0.9, 0.7, 0.2, 0.4, 1.0, 0.8, 0.3;
  CrfModel model = testing::identical_pixel_model(phi, 0.0);
  DensePairwise op(model);
  LpOptions opts;
  opts.outer_iters = 60;
  LpResult r = lp_minimise(model, op, Matrix::Constant(3, 3, 1.0 / 3), opts);
  CHECK(round_argmax(r.y).x == std::vector<int>{0, 1, 2});
  CHECK(testing::max_abs(r.y - integral_labeling(model, {{0, 1, 2}}).y) < 1e-6);
}

TEST_CASE("LP rounds no worse than QP on small exhaustive instances") {
  std::mt19937_64 rng(40);
  int wins = 0;
  for (int t = 0; t < 10; ++t) {
    verify::SmallModelSpec spec;
    spec.width = 2;
    spec.height = 2;
    spec.clique_size = 3;
    CrfModel model = verify::random_small_model(rng, spec);
    DensePairwise op(model);
    QpResult qp = qp_minimise(model, op);
    LpResult lp = lp_minimise(model, op, qp.s.y);
    double best = oracle::exhaustive_map(model).energy;
    CHECK(energy(model, lp.y) >= best - 1e-12);
    wins += energy(model, lp.y) <= energy(model, qp.s.y) + 1e-12;
  }
  CHECK(wins >= 8);
}

TEST_CASE("outer objective is non-increasing with long inner loops") {
  std::mt19937_64 rng(41);
  for (int t = 0; t < 3; ++t) {
    verify::SmallModelSpec spec;
    spec.clique_size = 3;
    CrfModel model = verify::random_small_model(rng, spec);
    DensePairwise op(model);
    LpOptions opts;
    opts.inner_iters = 200;
    opts.outer_iters = 6;
    LpResult r = lp_minimise(model, op, verify::random_simplex_rows(rng, 6, 3), opts);
    for (std::size_t k = 1; k < r.trace.size(); ++k)
      CHECK(r.trace[k].relaxed_objective <= r.trace[k - 1].relaxed_objective + 1e-6);
    CHECK(is_row_stochastic(r.y, 1e-12));
  }
}

TEST_CASE("serial and parallel runs agree") {
  verify::Scene scene = verify::synthetic_scene(16, 12, 4, 5);
  CliqueSet cl = CliqueSet::from_segments(scene.image, std::vector<int>(192, 1), 5.0, 100.0);
  CrfModel model = CrfModel::from_image(scene.image, scene.unaries, {{3.0, {10.0, 15.0}, FeatureKind::Bilateral}}, cl);
  LatticePairwise s_op(model, 16, Execution::Serial), p_op(model, 16, Execution::Parallel);
  LpOptions so, po;
  so.exec = Execution::Serial;
  EnergyFn none = [](const DiscreteLabeling&) { return 0.0; };
  Matrix y0 = Matrix::Constant(192, 4, 0.25);
  CHECK(lp_minimise(model, s_op, y0, so, none).y == lp_minimise(model, p_op, y0, po, none).y);
}

}
