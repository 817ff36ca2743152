#include "dcrf/app.hpp"

#include "dcrf/io.hpp"
#include "dcrf/meanfield.hpp"
#include "dcrf/pairwise.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <set>

namespace dcrf::app {

using nlohmann::json;

namespace {

const std::map<std::string, SolverKind>& solver_names() {
  static const std::map<std::string, SolverKind> names = {
      {"mf5", SolverKind::Mf5}, {"qp", SolverKind::Qp}, {"lp", SolverKind::Lp},
      {"mf5_clique", SolverKind::Mf5Clique}, {"qp_clique", SolverKind::QpClique}, {"lp_clique", SolverKind::LpClique}};
  return names;
}

template <class T>
void read(const json& obj, const char* key, T& out) {
  if (!obj.contains(key)) return;
  try {
    out = obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw InvalidInput(std::string("config: bad value for '") + key + "'");
  }
}

void reject_unknown(const json& obj, const std::set<std::string>& known, const std::string& where) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    if (!known.count(it.key())) throw InvalidInput("config: unknown key '" + it.key() + "' in " + where);
  }
}

}  // namespace

SolverKind parse_solver(const std::string& name) {
  auto it = solver_names().find(name);
  if (it == solver_names().end()) throw InvalidInput("unknown solver '" + name + "'");
  return it->second;
}

std::string solver_name(SolverKind kind) {
  for (const auto& [name, k] : solver_names())
    if (k == kind) return name;
  return "?";
}

bool uses_cliques(SolverKind kind) {
  return kind == SolverKind::Mf5Clique || kind == SolverKind::QpClique || kind == SolverKind::LpClique;
}

void RunConfig::validate() const {
  for (double s : {sigma1, sigma2, sigma3})
    if (!(s > 0.0)) throw InvalidInput("config: bandwidths must be > 0");
  if (!(w1 >= 0.0) || !(w2 >= 0.0)) throw InvalidInput("config: kernel weights must be >= 0");
  if (!(clique_gamma >= 0.0)) throw InvalidInput("config: gamma must be >= 0");
  if (!(clique_eta > 0.0)) throw InvalidInput("config: eta must be > 0");
  if (grid_block != 0 && grid_block < 2) throw InvalidInput("config: grid_block must be >= 2");
  if (mf_iters < 0) throw InvalidInput("config: mf_iters must be >= 0");
  if (n_bins < 2) throw InvalidInput("config: n_bins must be >= 2");
  qp.validate();
  lp.validate();
}

RunConfig parse_config(const json& doc, const std::optional<std::string>& preset) {
  if (!doc.is_object()) throw InvalidInput("config: top level must be an object");
  const json* obj = &doc;
  if (doc.contains("presets")) {
    const json& presets = doc.at("presets");
    if (!presets.is_object() || presets.empty()) throw InvalidInput("config: 'presets' must be a non-empty object");
    if (!preset) {
      if (presets.size() != 1) throw InvalidInput("config: several presets present, choose one with --preset");
      obj = &presets.begin().value();
    } else {
      if (!presets.contains(*preset)) throw InvalidInput("config: no preset named '" + *preset + "'");
      obj = &presets.at(*preset);
    }
  } else if (preset) {
    throw InvalidInput("config: --preset given but the config has no 'presets' object");
  }
  const json& c = *obj;
  reject_unknown(c, {"description", "solver", "w1", "w2", "sigma1", "sigma2", "sigma3", "gamma", "eta",
                     "min_region_size", "grid_block", "qp", "lp", "lp_init", "mf_iters", "n_bins",
                     "exact_energy_limit", "ignore_label", "serial"},
                 "preset");
  RunConfig cfg;
  if (c.contains("solver")) cfg.solver = parse_solver(c.at("solver").get<std::string>());
  read(c, "w1", cfg.w1);
  read(c, "w2", cfg.w2);
  read(c, "sigma1", cfg.sigma1);
  read(c, "sigma2", cfg.sigma2);
  read(c, "sigma3", cfg.sigma3);
  read(c, "gamma", cfg.clique_gamma);
  read(c, "eta", cfg.clique_eta);
  read(c, "min_region_size", cfg.min_region_size);
  read(c, "grid_block", cfg.grid_block);
  read(c, "mf_iters", cfg.mf_iters);
  read(c, "n_bins", cfg.n_bins);
  read(c, "exact_energy_limit", cfg.exact_energy_limit);
  read(c, "ignore_label", cfg.ignore_label);
  bool serial = false;
  read(c, "serial", serial);
  cfg.exec = serial ? Execution::Serial : Execution::Parallel;
  if (c.contains("lp_init")) {
    std::string v = c.at("lp_init").get<std::string>();
    if (v == "qp") cfg.lp_init = LpInit::Qp;
    else if (v == "unary") cfg.lp_init = LpInit::Unary;
    else throw InvalidInput("config: lp_init must be 'qp' or 'unary'");
  }
  if (c.contains("qp")) {
    const json& q = c.at("qp");
    reject_unknown(q, {"max_iters", "rel_tol", "window", "init"}, "qp");
    read(q, "max_iters", cfg.qp.max_iters);
    read(q, "rel_tol", cfg.qp.rel_tol);
    read(q, "window", cfg.qp.window);
    if (q.contains("init")) {
      std::string v = q.at("init").get<std::string>();
      if (v == "unary_argmin") cfg.qp.init = QpInit::UnaryArgmin;
      else if (v == "uniform") cfg.qp.init = QpInit::Uniform;
      else throw InvalidInput("config: qp.init must be 'unary_argmin' or 'uniform'");
    }
  }
  if (c.contains("lp")) {
    const json& l = c.at("lp");
    reject_unknown(l, {"outer_iters", "inner_iters", "gamma_iters", "lambda", "gamma_init", "stabilizer"}, "lp");
    read(l, "outer_iters", cfg.lp.outer_iters);
    read(l, "inner_iters", cfg.lp.inner_iters);
    read(l, "gamma_iters", cfg.lp.gamma_iters);
    read(l, "lambda", cfg.lp.lambda);
    read(l, "gamma_init", cfg.lp.gamma_init);
    read(l, "stabilizer", cfg.lp.stabilizer);
  }
  cfg.lp.n_bins = cfg.n_bins;
  cfg.lp.exec = cfg.exec;
  cfg.validate();
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path, const std::optional<std::string>& preset) {
  std::ifstream in(path);
  if (!in) throw io::InputError(path.string() + ": cannot open file");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw io::InputError(path.string() + ": offset " + std::to_string(e.byte) + ": malformed JSON");
  }
  return parse_config(doc, preset);
}

json to_json(const RunConfig& cfg) {
  return {{"solver", solver_name(cfg.solver)},
          {"w1", cfg.w1},
          {"w2", cfg.w2},
          {"sigma1", cfg.sigma1},
          {"sigma2", cfg.sigma2},
          {"sigma3", cfg.sigma3},
          {"gamma", cfg.clique_gamma},
          {"eta", cfg.clique_eta},
          {"min_region_size", cfg.min_region_size},
          {"grid_block", cfg.grid_block},
          {"qp",
           {{"max_iters", cfg.qp.max_iters},
            {"rel_tol", cfg.qp.rel_tol},
            {"window", cfg.qp.window},
            {"init", cfg.qp.init == QpInit::UnaryArgmin ? "unary_argmin" : "uniform"}}},
          {"lp",
           {{"outer_iters", cfg.lp.outer_iters},
            {"inner_iters", cfg.lp.inner_iters},
            {"gamma_iters", cfg.lp.gamma_iters},
            {"lambda", cfg.lp.lambda},
            {"gamma_init", cfg.lp.gamma_init},
            {"stabilizer", cfg.lp.stabilizer}}},
          {"lp_init", cfg.lp_init == LpInit::Qp ? "qp" : "unary"},
          {"mf_iters", cfg.mf_iters},
          {"n_bins", cfg.n_bins},
          {"exact_energy_limit", cfg.exact_energy_limit},
          {"ignore_label", cfg.ignore_label},
          {"serial", cfg.exec == Execution::Serial}};
}

Problem load_problem(const ProblemBundle& bundle, const RunConfig& cfg) {
  RgbImage image = io::load_image(bundle.image);
  Matrix unaries = io::load_unaries(bundle.unaries);
  if (unaries.rows() != image.size())
    throw io::InputError(bundle.unaries.string() + ": " + std::to_string(unaries.rows()) + " unary rows but the image has " +
                         std::to_string(image.size()) + " pixels");
  CliqueSet cliques;
  if (uses_cliques(cfg.solver)) {
    if (bundle.superpixels) {
      std::vector<int> seg = io::load_index_map(*bundle.superpixels, image.width, image.height);
      cliques = CliqueSet::from_segments(image, seg, cfg.clique_gamma, cfg.clique_eta, std::max(3, cfg.min_region_size));
    } else if (cfg.grid_block >= 2) {
      std::vector<int> seg = io::grid_superpixels(image.width, image.height, cfg.grid_block);
      cliques = CliqueSet::from_segments(image, seg, cfg.clique_gamma, cfg.clique_eta, 3);
    } else {
      throw InvalidInput("solver " + solver_name(cfg.solver) + " needs a superpixel map or a grid block size");
    }
  }
  std::vector<KernelSpec> specs = {{cfg.w1, {cfg.sigma1, cfg.sigma2}, FeatureKind::Bilateral},
                                   {cfg.w2, {cfg.sigma3}, FeatureKind::Spatial}};
  CrfModel model = CrfModel::from_image(image, std::move(unaries), specs, std::move(cliques),
                                        {cfg.clique_gamma, cfg.clique_eta});
  std::optional<DiscreteLabeling> gt;
  if (bundle.ground_truth) {
    gt = io::load_labeling(*bundle.ground_truth, image.width, image.height);
    for (std::size_t a = 0; a < gt->x.size(); ++a) {
      int l = gt->x[a];
      if (l != cfg.ignore_label && (l < 0 || l >= model.n_labels()))
        throw io::InputError(bundle.ground_truth->string() + ": entry " + std::to_string(a) + ": label " +
                             std::to_string(l) + " outside the label space");
    }
  }
  return {std::move(image), std::move(model), std::move(gt)};
}

Metrics metrics(const DiscreteLabeling& pred, const DiscreteLabeling& gt, int ignore_label) {
  if (pred.x.size() != gt.x.size()) throw InvalidInput("metrics: labelings differ in length");
  std::map<int, std::pair<Index, Index>> counts;  // label -> (intersection, union)
  Metrics m;
  Index correct = 0;
  for (std::size_t a = 0; a < gt.x.size(); ++a) {
    int g = gt.x[a], p = pred.x[a];
    if (g == ignore_label) continue;
    ++m.valid_pixels;
    if (g == p) {
      ++correct;
      ++counts[g].first;
      ++counts[g].second;
    } else {
      ++counts[g].second;
      ++counts[p].second;
    }
  }
  if (m.valid_pixels == 0) return m;
  m.accuracy = 100.0 * static_cast<double>(correct) / static_cast<double>(m.valid_pixels);
  double iou = 0;
  for (const auto& [label, c] : counts) iou += static_cast<double>(c.first) / static_cast<double>(c.second);
  m.mean_iou = 100.0 * iou / static_cast<double>(counts.size());
  return m;
}

SolveResult solve(const Problem& problem, const RunConfig& cfg) {
  const CrfModel& model = problem.model;
  LatticePairwise op(model, cfg.n_bins, cfg.exec);
  EnergyFn energy = trace_energy(model, op, cfg.exact_energy_limit);
  LpOptions lp = cfg.lp;
  lp.n_bins = cfg.n_bins;
  lp.exec = cfg.exec;

  SolveResult r;
  switch (cfg.solver) {
    case SolverKind::Mf5:
    case SolverKind::Mf5Clique: {
      MfResult mf = mf_minimise(model, op, cfg.mf_iters, energy, cfg.exec);
      r.y = std::move(mf.q);
      r.trace = std::move(mf.trace);
      break;
    }
    case SolverKind::Qp:
    case SolverKind::QpClique: {
      QpResult qp = qp_minimise(model, op, cfg.qp, energy);
      r.y = std::move(qp.s.y);
      r.trace = std::move(qp.trace);
      break;
    }
    case SolverKind::Lp:
    case SolverKind::LpClique: {
      Matrix y0 = cfg.lp_init == LpInit::Qp ? qp_minimise(model, op, cfg.qp, energy).s.y
                                            : qp_initial_point(model, QpInit::UnaryArgmin).y;
      LpResult res = lp_minimise(model, op, y0, lp, energy);
      r.y = std::move(res.y);
      r.trace = std::move(res.trace);
      break;
    }
  }
  if (!is_row_stochastic(r.y, 1e-9)) throw SolverFailure("solver output is not row-stochastic");
  r.labeling = round_argmax(r.y);
  r.energy = r.trace.records.back().discrete_energy;
  return r;
}

SolveResult run(const ProblemBundle& bundle, const RunConfig& cfg, const std::filesystem::path& out_dir) {
  cfg.validate();
  Problem problem = load_problem(bundle, cfg);
  SolveResult r = solve(problem, cfg);

  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw io::InputError(out_dir.string() + ": cannot create output directory");
  const int w = problem.image.width, h = problem.image.height;
  io::save_labeling_png(out_dir / "labeling.png", r.labeling, w, h);
  io::save_labeling_csv(out_dir / "labeling.csv", r.labeling, w, h);
  io::save_trace_csv(out_dir / "trace.csv", r.trace);

  json summary = {{"solver", solver_name(cfg.solver)},
                  {"n_pixels", problem.model.n_pixels()},
                  {"n_labels", problem.model.n_labels()},
                  {"n_cliques", problem.model.cliques().size()},
                  {"iterations", static_cast<int>(r.trace.size()) - 1},
                  {"energy", r.energy},
                  {"energy_exact", problem.model.n_pixels() <= cfg.exact_energy_limit},
                  {"seconds", r.trace.records.back().seconds},
                  {"config", to_json(cfg)}};
  std::ofstream(out_dir / "summary.json") << summary.dump(2) << '\n';
  if (problem.ground_truth) {
    Metrics m = metrics(r.labeling, *problem.ground_truth, cfg.ignore_label);
    json mj = {{"accuracy", m.accuracy}, {"mean_iou", m.mean_iou}, {"valid_pixels", m.valid_pixels}};
    std::ofstream(out_dir / "metrics.json") << mj.dump(2) << '\n';
  }
  return r;
}

}  // namespace dcrf::app
