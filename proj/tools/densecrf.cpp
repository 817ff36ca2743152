#include "dcrf/app.hpp"
#include "dcrf/parallel.hpp"
#include "dcrf/verify.hpp"

#include <CLI11.hpp>

#include <iostream>

namespace {

int solve_command(const dcrf::app::ProblemBundle& bundle, const std::string& solver, const std::string& config,
                  const std::string& preset, int grid_block, const std::string& out) {
  dcrf::app::RunConfig cfg =
      dcrf::app::load_config(config, preset.empty() ? std::nullopt : std::optional<std::string>(preset));
  cfg.solver = dcrf::app::parse_solver(solver);
  if (grid_block > 0) cfg.grid_block = grid_block;
  cfg.validate();
  auto result = dcrf::app::run(bundle, cfg, out);
  std::cout << "solver " << dcrf::app::solver_name(cfg.solver) << ": energy " << result.energy << ", "
            << result.trace.size() << " trace rows, written to " << out << "\n";
  return 0;
}

int oracle_command(const std::string& suite) {
  std::vector<std::string> names = suite == "all" ? dcrf::verify::suite_names() : std::vector<std::string>{suite};
  bool all = true;
  for (const auto& name : names) {
    auto r = dcrf::verify::run_suite(name);
    std::cout << (r.passed ? "PASS " : "FAIL ") << r.name << ": " << r.detail << "\n";
    all = all && r.passed;
  }
  return all ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  dcrf::tune_allocator();
  CLI::App cli{"Dense CRF MAP inference"};
  cli.require_subcommand(1);

  auto* solve = cli.add_subcommand("solve", "Solve one problem");
  dcrf::app::ProblemBundle bundle;
  std::string image, unaries, superpixels, gt, config, preset, solver, out;
  int grid_block = 0;
  solve->add_option("--image", image, "RGB PNG")->required();
  solve->add_option("--unaries", unaries, "Unary costs, CSV or binary")->required();
  solve->add_option("--solver", solver, "mf5|qp|lp|mf5_clique|qp_clique|lp_clique")->required();
  auto* sp = solve->add_option("--superpixels", superpixels, "Segment id map, PNG or CSV");
  solve->add_option("--grid-block", grid_block, "Grid superpixels of this block size")->excludes(sp);
  solve->add_option("--gt", gt, "Ground-truth labeling, PNG or CSV");
  solve->add_option("--config", config, "JSON parameters")->required();
  solve->add_option("--preset", preset, "Preset name inside the config");
  solve->add_option("--out", out, "Output directory")->required();

  auto* check = cli.add_subcommand("oracle-check", "Run brute-force validation suites");
  std::string suite = "all";
  check->add_option("--suite", suite, "Suite name or all");

  try {
    cli.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = cli.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*solve) {
      bundle.image = image;
      bundle.unaries = unaries;
      if (!superpixels.empty()) bundle.superpixels = superpixels;
      if (!gt.empty()) bundle.ground_truth = gt;
      return solve_command(bundle, solver, config, preset, grid_block, out);
    }
    return oracle_command(suite);
  } catch (const dcrf::InvalidInput& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "solver failure: " << e.what() << "\n";
    return 3;
  }
}
