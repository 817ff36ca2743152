#pragma once

#include "dcrf/lp_solver.hpp"
#include "dcrf/model.hpp"
#include "dcrf/qp_solver.hpp"
#include "dcrf/trace.hpp"

#include <json.hpp>

#include <filesystem>
#include <optional>
#include <string>

namespace dcrf::app {

enum class SolverKind { Mf5, Qp, Lp, Mf5Clique, QpClique, LpClique };

SolverKind parse_solver(const std::string& name);
std::string solver_name(SolverKind kind);
bool uses_cliques(SolverKind kind);

enum class LpInit { Qp, Unary };

struct RunConfig {
  SolverKind solver = SolverKind::Qp;
  // Bilateral kernel: weight w1, position sigma1, colour sigma2. Spatial kernel: w2, sigma3.
  double w1 = 60.5;
  double w2 = 22.89;
  double sigma1 = 48.73;
  double sigma2 = 6.52;
  double sigma3 = 2.36;
  double clique_gamma = 0.0;
  double clique_eta = 1.0;
  int min_region_size = 3;
  int grid_block = 0;
  QpOptions qp;
  LpOptions lp;
  LpInit lp_init = LpInit::Qp;
  int mf_iters = 5;
  int n_bins = 16;
  // Trace energies are exact up to this many pixels and filtered above it.
  Index exact_energy_limit = 4096;
  int ignore_label = 255;
  Execution exec = Execution::Parallel;

  void validate() const;
};

// Reads a flat parameter object, or one entry of {"presets": {...}}.
RunConfig parse_config(const nlohmann::json& doc, const std::optional<std::string>& preset = std::nullopt);
RunConfig load_config(const std::filesystem::path& path, const std::optional<std::string>& preset = std::nullopt);
nlohmann::json to_json(const RunConfig& cfg);

struct ProblemBundle {
  std::filesystem::path image;
  std::filesystem::path unaries;
  std::optional<std::filesystem::path> superpixels;
  std::optional<std::filesystem::path> ground_truth;
};

struct Problem {
  RgbImage image;
  CrfModel model;
  std::optional<DiscreteLabeling> ground_truth;
};

Problem load_problem(const ProblemBundle& bundle, const RunConfig& cfg);

struct Metrics {
  double accuracy = 0.0;
  double mean_iou = 0.0;
  Index valid_pixels = 0;
};

Metrics metrics(const DiscreteLabeling& pred, const DiscreteLabeling& gt, int ignore_label = 255);

struct SolveResult {
  Matrix y;
  DiscreteLabeling labeling;
  EnergyTrace trace;
  double energy = 0.0;
};

SolveResult solve(const Problem& problem, const RunConfig& cfg);

// Loads, solves and writes labeling.png, labeling.csv, trace.csv, summary.json and
// metrics.json (with ground truth) into out_dir.
SolveResult run(const ProblemBundle& bundle, const RunConfig& cfg, const std::filesystem::path& out_dir);

}  // namespace dcrf::app
