#include "dcrf/verify.hpp"

#include "dcrf/app.hpp"
#include "dcrf/io.hpp"
#include "dcrf/lattice.hpp"
#include "dcrf/lp_solver.hpp"
#include "dcrf/meanfield.hpp"
#include "dcrf/oracle.hpp"
#include "dcrf/pairwise.hpp"
#include "dcrf/qp_solver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <iterator>
#include <map>
#include <memory>
#include <numeric>
#include <sstream>

namespace dcrf::verify {

namespace {

using Clock = std::chrono::steady_clock;

double since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(double v) {
  std::ostringstream s;
  s.precision(3);
  s << v;
  return s.str();
}

double uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

int uniform_int(std::mt19937_64& rng, int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }

// Image-like bilateral features: smooth colour field with a few regions and mild noise.
Matrix image_features(std::mt19937_64& rng, int w, int h) {
  const double s1 = uniform(rng, 2.0, 6.0), s2 = uniform(rng, 8.0, 30.0);
  double base[3], gx[3], gy[3];
  for (int c = 0; c < 3; ++c) {
    base[c] = uniform(rng, 40, 215);
    gx[c] = uniform(rng, -6, 6);
    gy[c] = uniform(rng, -6, 6);
  }
  const int cx = uniform_int(rng, 0, w - 1), cy = uniform_int(rng, 0, h - 1);
  const double r = uniform(rng, 1.5, 0.6 * std::max(w, h));
  double blob[3];
  for (double& b : blob) b = uniform(rng, -80, 80);
  Matrix f(static_cast<Index>(w) * h, 5);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      Index a = static_cast<Index>(y) * w + x;
      bool inside = (x - cx) * (x - cx) + (y - cy) * (y - cy) < r * r;
      f(a, 0) = x / s1;
      f(a, 1) = y / s1;
      for (int c = 0; c < 3; ++c) {
        double col = base[c] + gx[c] * x + gy[c] * y + (inside ? blob[c] : 0.0) + uniform(rng, -10, 10);
        f(a, 2 + c) = std::clamp(col, 0.0, 255.0) / s2;
      }
    }
  }
  return f;
}

// Naive dual objective from the stored products.
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

RelaxedLabeling random_relaxed(std::mt19937_64& rng, const CrfModel& model) {
  RelaxedLabeling s;
  s.y = random_simplex_rows(rng, model.n_pixels(), model.n_labels());
  s.z.resize(model.cliques().size(), model.n_labels());
  for (Index k = 0; k < s.z.size(); ++k) s.z.data()[k] = uniform(rng, 0.0, 1.0);
  return s;
}

std::vector<double> flatten(const RelaxedLabeling& s) {
  std::vector<double> v(s.y.data(), s.y.data() + s.y.size());
  v.insert(v.end(), s.z.data(), s.z.data() + s.z.size());
  return v;
}

RelaxedLabeling unflatten(std::span<const double> v, Index n, Index m, Index r) {
  RelaxedLabeling s{Matrix(n, m), Matrix(r, m)};
  std::copy(v.begin(), v.begin() + n * m, s.y.data());
  std::copy(v.begin() + n * m, v.end(), s.z.data());
  return s;
}

CheckResult check_filtering() {
  auto t0 = Clock::now();
  std::mt19937_64 rng(101);
  double worst_plain = 0, worst_ordered = 0, scale_sum = 0;
  const int instances = 50;
  for (int t = 0; t < instances; ++t) {
    int w = uniform_int(rng, 4, 12), h = uniform_int(rng, 4, 128 / w);
    Matrix f = image_features(rng, w, h);
    const Index n = f.rows();
    PermutohedralLattice lat(f);
    Matrix v(n, 3);
    for (Index k = 0; k < v.size(); ++k) v.data()[k] = uniform(rng, 0, 1);
    Matrix fil = lat.filter(v);
    Matrix ref = oracle::naive_gaussian_sum(f, v);
    double s = fil.cwiseProduct(ref).sum() / fil.squaredNorm();
    scale_sum += 1.0 / s;
    worst_plain = std::max(worst_plain, (s * fil - ref).norm() / ref.norm());

    Matrix gram = lat.filter(Matrix::Identity(n, n));
    Vector vals(n), levels(n);
    for (Index a = 0; a < n; ++a) {
      vals[a] = uniform(rng, 0, 1);
      levels[a] = a % 7 == 0 ? 0.5 : uniform(rng, 0, 1);
    }
    for (Comparison cmp : {Comparison::GreaterEqual, Comparison::LessEqual}) {
      Vector got = lat.filter_ordered(vals, levels, {16, cmp});
      Vector want = oracle::naive_ordered_sum(gram, vals, levels, cmp, 16);
      worst_ordered = std::max(worst_ordered, (got - want).norm() / want.norm());
    }
  }
  double secs = since(t0);
  bool ok = worst_plain < 0.15 && worst_ordered < 1e-6 && secs < 10.0;
  return {"filtering", ok,
          "max scale-aligned error " + fmt(worst_plain) + " (< 0.15), ordered error " + fmt(worst_ordered) +
              " (< 1e-6), mean lattice/naive scale " + fmt(scale_sum / instances) + ", " + fmt(secs) + " s (< 10 s)",
          secs};
}

CheckResult check_gradient() {
  auto t0 = Clock::now();
  std::mt19937_64 rng(202);
  double worst = 0;
  for (int t = 0; t < 20; ++t) {
    SmallModelSpec spec;
    spec.width = uniform_int(rng, 2, 4);
    spec.height = 2;
    spec.n_labels = uniform_int(rng, 2, 4);
    spec.clique_size = uniform_int(rng, 3, spec.width * spec.height);
    CrfModel model = random_small_model(rng, spec);
    DensePairwise op(model);
    RelaxedLabeling s = random_relaxed(rng, model);
    QpGradient g = qp_gradient(model, qp_make_state(model, op, s));
    const Index n = model.n_pixels(), m = model.n_labels(), r = model.cliques().size();
    auto f = [&](std::span<const double> v) {
      RelaxedLabeling p = unflatten(v, n, m, r);
      return oracle::reference_qp_objective(model, p.y, p.z);
    };
    std::vector<double> fd = oracle::fd_gradient(f, flatten(s), 1e-6);
    std::vector<double> an(g.y.data(), g.y.data() + g.y.size());
    an.insert(an.end(), g.z.data(), g.z.data() + g.z.size());
    for (std::size_t k = 0; k < an.size(); ++k)
      worst = std::max(worst, std::abs(an[k] - fd[k]) / std::max(std::abs(an[k]), 1e-8));
  }
  return {"gradient", worst < 1e-5, "max relative error " + fmt(worst) + " (< 1e-5) over 20 instances", since(t0)};
}

CheckResult check_step_size() {
  auto t0 = Clock::now();
  std::mt19937_64 rng(303);
  double worst_qp = -1e300, worst_lp = -1e300;
  for (int t = 0; t < 20; ++t) {
    SmallModelSpec spec;
    spec.clique_size = 3 + t % 3;
    spec.pairwise_scale = t % 2 ? 3.0 : 1.0;
    CrfModel model = random_small_model(rng, spec);
    DensePairwise op(model);
    RelaxedLabeling s = random_relaxed(rng, model);
    QpState st = qp_make_state(model, op, s);
    QpGradient g = qp_gradient(model, st);
    RelaxedLabeling target = qp_conditional_gradient(g);
    if (t % 4 == 3) {
      // An arbitrary vertex also exercises the concave branch.
      DiscreteLabeling x;
      for (Index a = 0; a < model.n_pixels(); ++a) x.x.push_back(uniform_int(rng, 0, int(model.n_labels()) - 1));
      target = integral_labeling(model, x);
    }
    QpStep step = qp_optimal_step(model, op, st, g, target);
    auto along = [&](double d) {
      return oracle::reference_qp_objective(model, s.y + d * (target.y - s.y), s.z + d * (target.z - s.z));
    };
    double grid = oracle::grid_step_search(along, 1000);
    worst_qp = std::max(worst_qp, along(step.delta) - along(grid));
  }
  for (int t = 0; t < 20; ++t) {
    SmallModelSpec spec;
    spec.clique_size = 3 + t % 3;
    CrfModel model = random_small_model(rng, spec);
    DensePairwise op(model);
    LpOptions opts;
    opts.inner_iters = t % 5;
    Matrix anchor = random_simplex_rows(rng, model.n_pixels(), model.n_labels());
    LpDualState st = prox_subproblem(model, op, anchor, opts).state;
    update_beta_gamma(model, st, opts, true);
    LpDirection dir = lp_conditional_gradient(model, op, st.y_tilde);
    double delta = lp_optimal_step(st, dir);
    auto along = [&](double d) {
      LpDualState moved = st;
      moved.a_alpha = st.a_alpha + d * (dir.a_s - st.a_alpha);
      moved.u_mu = st.u_mu + d * (dir.u_s - st.u_mu);
      return naive_dual(model, moved);
    };
    double grid = oracle::grid_step_search(along, 1000);
    worst_lp = std::max(worst_lp, along(delta) - along(grid));
  }
  bool ok = worst_qp <= 1e-6 && worst_lp <= 1e-6;
  return {"step_size", ok,
          "closed form minus grid optimum: QP " + fmt(worst_qp) + ", LP dual " + fmt(worst_lp) + " (<= 1e-6)", since(t0)};
}

CheckResult check_monotonicity() {
  auto t0 = Clock::now();
  std::mt19937_64 rng(404);
  double qp_rise = -1e300, dual_rise = -1e300, outer_rise = -1e300, gamma_rise = -1e300;
  for (int t = 0; t < 20; ++t) {
    SmallModelSpec spec;
    spec.width = 2 + t % 3;
    spec.clique_size = 3;
    spec.pairwise_scale = 1.0 + t % 4;
    CrfModel model = random_small_model(rng, spec);
    DensePairwise op(model);
    QpState st = qp_make_state(model, op, qp_initial_point(model, t % 2 ? QpInit::Uniform : QpInit::UnaryArgmin));
    double prev = oracle::reference_qp_objective(model, st.s.y, st.s.z);
    for (int it = 0; it < 50; ++it) {
      QpGradient g = qp_gradient(model, st);
      RelaxedLabeling target = qp_conditional_gradient(g);
      QpStep step = qp_optimal_step(model, op, st, g, target);
      qp_apply_step(model, st, target, step);
      double cur = oracle::reference_qp_objective(model, st.s.y, st.s.z);
      qp_rise = std::max(qp_rise, cur - prev);
      prev = cur;
    }
  }
  for (int t = 0; t < 20; ++t) {
    SmallModelSpec spec;
    spec.width = 2;
    spec.height = 2;
    spec.clique_size = 3;
    CrfModel model = random_small_model(rng, spec);
    DensePairwise op(model);
    LpOptions opts;
    opts.inner_iters = 20;
    Matrix anchor = random_simplex_rows(rng, model.n_pixels(), model.n_labels());
    double prev = naive_dual(model, lp_initial_state(model, anchor, opts.lambda));
    prox_subproblem(model, op, anchor, opts, [&](const LpDualState& st, LpBlock) {
      double cur = naive_dual(model, st);
      dual_rise = std::max(dual_rise, cur - prev);
      prev = cur;
    });
  }
  for (int t = 0; t < 10; ++t) {
    SmallModelSpec spec;
    spec.clique_size = 3 + t % 2;
    CrfModel model = random_small_model(rng, spec);
    DensePairwise op(model);
    LpOptions opts;
    opts.inner_iters = 200;
    opts.outer_iters = 8;
    Matrix y = random_simplex_rows(rng, model.n_pixels(), model.n_labels());
    double prev = oracle::reference_lp_objective(model, y);
    for (int k = 0; k < opts.outer_iters; ++k) {
      y = project_rows(prox_subproblem(model, op, y, opts).y_tilde);
      double cur = oracle::reference_lp_objective(model, y);
      outer_rise = std::max(outer_rise, cur - prev);
      prev = cur;
    }
  }
  for (int t = 0; t < 50; ++t) {
    const int m = 21;
    double lambda = std::pow(10.0, uniform(rng, -2, 1));
    Matrix yk = random_simplex_rows(rng, 1, m);
    std::vector<double> x(m), h(m);
    for (double& v : x) v = uniform(rng, -5, 5);
    double mean = std::accumulate(x.begin(), x.end(), 0.0) / m;
    for (int i = 0; i < m; ++i) h[i] = -lambda * (x[i] - mean) - yk(0, i);
    std::vector<double> init(m, 1e-3);
    double prev = 1e300;
    gamma_qp_solve(h, lambda, 200, init, 1e-6, [&](std::span<const double> g) {
      double cur = gamma_qp_objective(g, h, lambda);
      gamma_rise = std::max(gamma_rise, cur - prev - 1e-12 * std::abs(prev));
      prev = cur;
    });
  }
  bool ok = qp_rise <= 1e-10 && dual_rise <= 1e-6 && outer_rise <= 1e-6 && gamma_rise <= 0.0;
  return {"monotonicity", ok,
          "largest increase: QP " + fmt(qp_rise) + " (<= 1e-10), LP dual " + fmt(dual_rise) + " (<= 1e-6), LP outer " +
              fmt(outer_rise) + " (<= 1e-6), gamma " + fmt(gamma_rise) + " (<= 0)",
          since(t0)};
}

CheckResult check_sandwich() {
  auto t0 = Clock::now();
  std::mt19937_64 rng(505);
  int ordered = 0, below = 0;
  const int draws = 30;
  for (int t = 0; t < draws; ++t) {
    SmallModelSpec spec;
    spec.clique_size = uniform_int(rng, 3, 4);
    CrfModel model = random_small_model(rng, spec);
    DensePairwise op(model);
    auto energy = [&](const Matrix& y) { return oracle::reference_energy(model, round_argmax(y).x); };
    EnergyFn cheap = [](const DiscreteLabeling&) { return 0.0; };
    double best = oracle::exhaustive_map(model).energy;
    QpResult qp = qp_minimise(model, op, {}, cheap);
    LpResult lp = lp_minimise(model, op, qp.s.y, {}, cheap);
    MfResult mf = mf_minimise(model, op, 5, cheap);
    double e_qp = energy(qp.s.y), e_lp = energy(lp.y), e_mf = energy(mf.q);
    const double tol = 1e-9;
    if (e_qp < best - tol || e_lp < best - tol || e_mf < best - tol) ++below;
    if (e_lp <= e_qp + tol && e_qp <= e_mf + tol) ++ordered;
  }
  double secs = since(t0);
  bool ok = below == 0 && ordered * 10 >= draws * 7 && secs < 60.0;
  return {"sandwich", ok,
          std::to_string(below) + " energies below the exhaustive optimum (0 allowed), LP <= QP <= MF5 in " +
              std::to_string(ordered) + "/" + std::to_string(draws) + " draws (>= 70%), " + fmt(secs) + " s (< 60 s)",
          secs};
}

CheckResult check_scaling() {
  auto t0 = Clock::now();
  const std::vector<std::pair<int, int>> sizes = {{64, 64}, {128, 64}, {128, 128}, {256, 128}};
  app::RunConfig cfg;
  std::vector<KernelSpec> specs = {{cfg.w1, {cfg.sigma1, cfg.sigma2}, FeatureKind::Bilateral},
                                   {cfg.w2, {cfg.sigma3}, FeatureKind::Spatial}};
  std::vector<CrfModel> models;
  std::vector<std::unique_ptr<LatticePairwise>> ops;
  for (auto [w, h] : sizes) {
    Scene scene = synthetic_scene(w, h, 21, 606);
    models.push_back(CrfModel::from_image(scene.image, scene.unaries, specs));
    ops.push_back(std::make_unique<LatticePairwise>(models.back()));
  }
  EnergyFn cheap = [](const DiscreteLabeling&) { return 0.0; };
  std::vector<double> qp_times(sizes.size(), 1e300), lp_times(sizes.size(), 1e300);
  // Sizes are interleaved and each iteration is timed on its own so that load spikes only
  // lose samples.
  for (int rep = 0; rep < 9; ++rep) {
    for (std::size_t k = 0; k < sizes.size(); ++k) {
      QpOptions qo;
      qo.max_iters = 6;
      qo.rel_tol = 0.0;
      QpResult qp = qp_minimise(models[k], *ops[k], qo, cheap);
      const auto& rec = qp.trace.records;
      for (std::size_t r = 1; r < rec.size(); ++r) qp_times[k] = std::min(qp_times[k], rec[r].seconds - rec[r - 1].seconds);

      LpOptions lo;
      lo.inner_iters = 3;
      auto last = Clock::now();
      prox_subproblem(models[k], *ops[k], qp.s.y, lo, [&](const LpDualState&, LpBlock b) {
        if (b != LpBlock::FrankWolfe) return;
        auto now = Clock::now();
        lp_times[k] = std::min(lp_times[k], std::chrono::duration<double>(now - last).count());
        last = now;
      });
    }
  }
  double worst = 0;
  std::string detail = "per-iteration seconds QP";
  for (double v : qp_times) detail += " " + fmt(v);
  detail += ", LP inner";
  for (double v : lp_times) detail += " " + fmt(v);
  for (std::size_t k = 1; k < sizes.size(); ++k) {
    worst = std::max(worst, qp_times[k] / qp_times[k - 1]);
    worst = std::max(worst, lp_times[k] / lp_times[k - 1]);
  }
  detail += "; worst ratio per doubling " + fmt(worst) + " (< 2.5)";
  return {"scaling", worst < 2.5, detail, since(t0)};
}

CheckResult check_feasibility() {
  auto t0 = Clock::now();
  std::mt19937_64 rng(707);
  double worst = 0;
  bool z_ok = true;
  auto row_error = [](const Matrix& y) {
    double e = std::max(0.0, -y.minCoeff());
    for (Index a = 0; a < y.rows(); ++a) e = std::max(e, std::abs(y.row(a).sum() - 1.0));
    return e;
  };
  for (int t = 0; t < 4; ++t) {
    Scene scene = synthetic_scene(24, 16, 5, 700 + t);
    std::vector<int> seg = io::grid_superpixels(24, 16, 4);
    CliqueSet cliques = CliqueSet::from_segments(scene.image, seg, 20.0, 100.0);
    std::vector<KernelSpec> specs = {{5.0, {20.0, 10.0}, FeatureKind::Bilateral}, {3.0, {3.0}, FeatureKind::Spatial}};
    CrfModel model = CrfModel::from_image(scene.image, scene.unaries, specs, t % 2 ? cliques : CliqueSet{});
    LatticePairwise op(model);
    EnergyFn cheap = [](const DiscreteLabeling&) { return 0.0; };
    QpResult qp = qp_minimise(model, op, {}, cheap);
    LpResult lp = lp_minimise(model, op, qp.s.y, {}, cheap);
    MfResult mf = mf_minimise(model, op, 5, cheap);
    worst = std::max({worst, row_error(qp.s.y), row_error(lp.y), row_error(mf.q)});
    if (qp.s.z.size() > 0) z_ok = z_ok && qp.s.z.minCoeff() >= 0.0 && qp.s.z.maxCoeff() <= 1.0;
  }
  for (int t = 0; t < 10; ++t) {
    SmallModelSpec spec;
    spec.clique_size = 3;
    CrfModel model = random_small_model(rng, spec);
    DensePairwise op(model);
    EnergyFn cheap = [](const DiscreteLabeling&) { return 0.0; };
    QpResult qp = qp_minimise(model, op, {}, cheap);
    LpResult lp = lp_minimise(model, op, random_simplex_rows(rng, 6, 3), {}, cheap);
    MfResult mf = mf_minimise(model, op, 5, cheap);
    worst = std::max({worst, row_error(qp.s.y), row_error(lp.y), row_error(mf.q)});
  }
  double proj_sum = 0;
  bool proj_nonneg = true;
  for (int t = 0; t < 500; ++t) {
    int m = uniform_int(rng, 1, 21);
    std::vector<double> v(m);
    for (double& x : v) x = uniform(rng, -3, 3);
    std::vector<double> p = simplex_project(v);
    proj_nonneg = proj_nonneg && *std::min_element(p.begin(), p.end()) >= 0.0;
    proj_sum = std::max(proj_sum, std::abs(std::accumulate(p.begin(), p.end(), 0.0) - 1.0));
  }
  bool ok = worst <= 1e-9 && z_ok && proj_nonneg && proj_sum <= 1e-12;
  return {"feasibility", ok,
          "solver row error " + fmt(worst) + " (<= 1e-9), z in [0,1]: " + (z_ok ? "yes" : "no") +
              ", projection nonnegative: " + (proj_nonneg ? "yes" : "no") + ", projection sum error " + fmt(proj_sum) +
              " (<= 1e-12)",
          since(t0)};
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// Every trace column except wall-clock seconds.
std::string energy_columns(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::string line, out;
  while (std::getline(in, line)) {
    std::vector<std::string> f;
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');) f.push_back(cell);
    if (f.size() == 4) out += f[0] + "," + f[2] + "," + f[3] + "\n";
  }
  return out;
}

CheckResult check_determinism() {
  auto t0 = Clock::now();
  auto root = std::filesystem::temp_directory_path() / ("dcrf_determinism_" + std::to_string(::getpid()));
  std::filesystem::create_directories(root);
  Scene scene = synthetic_scene(40, 30, 4, 808);
  io::save_image(root / "image.png", scene.image);
  io::save_unaries_binary(root / "unaries.bin", scene.unaries);
  app::ProblemBundle bundle{root / "image.png", root / "unaries.bin", std::nullopt, std::nullopt};
  int same = 0, total = 0;
  std::string bad;
  for (auto kind : {app::SolverKind::Mf5Clique, app::SolverKind::QpClique, app::SolverKind::LpClique, app::SolverKind::Lp}) {
    app::RunConfig cfg;
    cfg.solver = kind;
    cfg.grid_block = 5;
    cfg.clique_gamma = 19.71;
    cfg.clique_eta = 109.0;
    auto a = root / (app::solver_name(kind) + "_a"), b = root / (app::solver_name(kind) + "_b");
    app::run(bundle, cfg, a);
    app::run(bundle, cfg, b);
    for (const char* file : {"labeling.png", "labeling.csv"}) {
      ++total;
      if (slurp(a / file) == slurp(b / file)) ++same; else bad += " " + app::solver_name(kind) + "/" + file;
    }
    ++total;
    if (energy_columns(a / "trace.csv") == energy_columns(b / "trace.csv")) ++same; else bad += " " + app::solver_name(kind) + "/trace";
  }
  std::filesystem::remove_all(root);
  return {"determinism", same == total,
          std::to_string(same) + "/" + std::to_string(total) + " outputs identical across repeated runs" +
              (bad.empty() ? "" : "; differing:" + bad),
          since(t0)};
}

const std::map<std::string, std::function<CheckResult()>>& suites() {
  static const std::map<std::string, std::function<CheckResult()>> s = {
      {"filtering", check_filtering},     {"gradient", check_gradient},   {"step_size", check_step_size},
      {"monotonicity", check_monotonicity}, {"sandwich", check_sandwich}, {"scaling", check_scaling},
      {"feasibility", check_feasibility}, {"determinism", check_determinism}};
  return s;
}

}  // namespace

std::vector<std::string> suite_names() {
  return {"filtering", "gradient", "step_size", "monotonicity", "sandwich", "scaling", "feasibility", "determinism"};
}

CheckResult run_suite(const std::string& name) {
  auto it = suites().find(name);
  if (it == suites().end()) throw InvalidInput("unknown suite '" + name + "'");
  return it->second();
}

Scene synthetic_scene(int width, int height, int n_labels, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const int n_seeds = std::max(4, width * height / 400);
  std::vector<std::array<double, 2>> pos(n_seeds);
  std::vector<int> label(n_seeds);
  std::vector<std::array<double, 3>> colour(n_labels);
  for (auto& c : colour)
    for (double& v : c) v = uniform(rng, 20, 235);
  for (int s = 0; s < n_seeds; ++s) {
    pos[s] = {uniform(rng, 0, width), uniform(rng, 0, height)};
    label[s] = uniform_int(rng, 0, n_labels - 1);
  }
  Scene scene;
  scene.image.width = width;
  scene.image.height = height;
  scene.image.pixels.resize(static_cast<std::size_t>(3) * width * height);
  scene.labels.resize(static_cast<std::size_t>(width) * height);
  scene.unaries.resize(static_cast<Index>(width) * height, n_labels);
  std::normal_distribution<double> noise(0.0, 8.0);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      int best = 0;
      double best_d = 1e300;
      for (int s = 0; s < n_seeds; ++s) {
        double d = (x - pos[s][0]) * (x - pos[s][0]) + (y - pos[s][1]) * (y - pos[s][1]);
        if (d < best_d) {
          best_d = d;
          best = s;
        }
      }
      std::size_t a = static_cast<std::size_t>(y) * width + x;
      int l = label[best];
      scene.labels[a] = l;
      for (int c = 0; c < 3; ++c) {
        double v = colour[l][c] + 0.2 * (x - width / 2.0) * (c - 1) + noise(rng);
        scene.image.pixels[3 * a + c] = static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
      }
      for (int i = 0; i < n_labels; ++i) scene.unaries(static_cast<Index>(a), i) = uniform(rng, 0.0, 2.0);
      scene.unaries(static_cast<Index>(a), l) -= 0.8;
    }
  }
  return scene;
}

CrfModel random_small_model(std::mt19937_64& rng, const SmallModelSpec& spec) {
  RgbImage img;
  img.width = spec.width;
  img.height = spec.height;
  const Index n = img.size();
  img.pixels.resize(static_cast<std::size_t>(3 * n));
  for (auto& p : img.pixels) p = static_cast<std::uint8_t>(uniform_int(rng, 0, 255));
  Matrix unaries(n, spec.n_labels);
  for (Index k = 0; k < unaries.size(); ++k) unaries.data()[k] = uniform(rng, 0.0, spec.unary_scale);
  std::vector<KernelSpec> specs = {
      {uniform(rng, 0.2, 1.0) * spec.pairwise_scale, {uniform(rng, 1.0, 3.0), uniform(rng, 30.0, 120.0)}, FeatureKind::Bilateral},
      {uniform(rng, 0.2, 1.0) * spec.pairwise_scale, {uniform(rng, 0.5, 2.0)}, FeatureKind::Spatial}};
  CliqueSet cliques;
  if (spec.clique_size >= 3) {
    std::vector<int> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);
    std::vector<int> members(order.begin(), order.begin() + std::min<Index>(spec.clique_size, n));
    std::sort(members.begin(), members.end());
    double var = color_variance(img, members);
    cliques = CliqueSet(n, {members}, {uniform(rng, 0.3, 1.5) * spec.clique_scale}, {var});
  }
  return CrfModel::from_image(img, std::move(unaries), specs, std::move(cliques));
}

Matrix random_simplex_rows(std::mt19937_64& rng, Index rows, Index cols) {
  std::exponential_distribution<double> e(1.0);
  Matrix y(rows, cols);
  for (Index a = 0; a < rows; ++a) {
    for (Index i = 0; i < cols; ++i) y(a, i) = e(rng);
    y.row(a) /= y.row(a).sum();
  }
  return y;
}

}  // namespace dcrf::verify
