#include "dcrf/lattice.hpp"
#include "dcrf/lp_solver.hpp"
#include "dcrf/model.hpp"
#include "dcrf/pairwise.hpp"
#include "dcrf/parallel.hpp"
#include "dcrf/qp_solver.hpp"
#include "dcrf/verify.hpp"

#include <benchmark/benchmark.h>

#include <map>
#include <memory>

namespace {

using namespace dcrf;

struct Fixture {
  CrfModel model;
  PermutohedralLattice lattice;
  Matrix values;
  Vector levels;
};

const Fixture& fixture(int side) {
  static std::map<int, std::unique_ptr<Fixture>> cache;
  auto& slot = cache[side];
  if (!slot) {
    verify::Scene scene = verify::synthetic_scene(side, side, 21, 42);
    std::vector<KernelSpec> specs = {{60.5, {48.73, 6.52}, FeatureKind::Bilateral}, {22.89, {2.36}, FeatureKind::Spatial}};
    CrfModel model = CrfModel::from_image(scene.image, scene.unaries, specs);
    PermutohedralLattice lat(model.kernels()[0].features);
    Matrix values = Matrix::Random(model.n_pixels(), 22);
    Vector levels = (Vector::Random(model.n_pixels()).array() + 1.0) / 2.0;
    slot = std::make_unique<Fixture>(Fixture{std::move(model), std::move(lat), std::move(values), std::move(levels)});
  }
  return *slot;
}

void BM_Filter(benchmark::State& state, Execution exec) {
  const Fixture& f = fixture(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(f.lattice.filter(f.values, exec));
  state.SetItemsProcessed(state.iterations() * f.model.n_pixels());
}

void BM_FilterOrdered(benchmark::State& state, Execution exec) {
  const Fixture& f = fixture(static_cast<int>(state.range(0)));
  Vector v = f.values.col(0);
  for (auto _ : state) benchmark::DoNotOptimize(f.lattice.filter_ordered(v, f.levels, {}, exec));
  state.SetItemsProcessed(state.iterations() * f.model.n_pixels());
}

void BM_PottsDense(benchmark::State& state) {
  const Fixture& f = fixture(static_cast<int>(state.range(0)));
  DensePairwise op(f.model);
  Matrix y = f.values.leftCols(21);
  for (auto _ : state) benchmark::DoNotOptimize(potts_product(op, y));
}

void BM_PottsLattice(benchmark::State& state) {
  const Fixture& f = fixture(static_cast<int>(state.range(0)));
  LatticePairwise op(f.model);
  Matrix y = f.values.leftCols(21);
  for (auto _ : state) benchmark::DoNotOptimize(potts_product(op, y));
}

void BM_QpIteration(benchmark::State& state, Execution exec) {
  const Fixture& f = fixture(static_cast<int>(state.range(0)));
  LatticePairwise op(f.model, 16, exec);
  QpState st = qp_make_state(f.model, op, qp_initial_point(f.model, QpInit::Uniform));
  for (auto _ : state) {
    QpGradient g = qp_gradient(f.model, st);
    RelaxedLabeling target = qp_conditional_gradient(g);
    QpStep step = qp_optimal_step(f.model, op, st, g, target);
    qp_apply_step(f.model, st, target, step);
  }
}

void BM_LpInnerRound(benchmark::State& state, Execution exec) {
  const Fixture& f = fixture(static_cast<int>(state.range(0)));
  LatticePairwise op(f.model, 16, exec);
  LpOptions opts;
  opts.exec = exec;
  LpDualState st = lp_initial_state(f.model, Matrix::Constant(f.model.n_pixels(), 21, 1.0 / 21), opts.lambda);
  bool warm = false;
  for (auto _ : state) {
    update_beta_gamma(f.model, st, opts, warm);
    warm = true;
    LpDirection dir = lp_conditional_gradient(f.model, op, st.y_tilde);
    lp_apply_step(f.model, st, dir, lp_optimal_step(st, dir));
  }
}

}  // namespace

BENCHMARK_CAPTURE(BM_Filter, serial, dcrf::Execution::Serial)->Arg(32)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_Filter, parallel, dcrf::Execution::Parallel)->Arg(32)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_FilterOrdered, serial, dcrf::Execution::Serial)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_FilterOrdered, parallel, dcrf::Execution::Parallel)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_PottsDense)->Arg(16)->Arg(32)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_PottsLattice)->Arg(16)->Arg(32)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_QpIteration, serial, dcrf::Execution::Serial)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_QpIteration, parallel, dcrf::Execution::Parallel)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_LpInnerRound, serial, dcrf::Execution::Serial)->Arg(64)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_LpInnerRound, parallel, dcrf::Execution::Parallel)->Arg(64)->Unit(benchmark::kMillisecond);

int main(int argc, char** argv) {
  dcrf::tune_allocator();
  benchmark::Initialize(&argc, argv);
  if (benchmark::ReportUnrecognizedArguments(argc, argv)) return 1;
  benchmark::RunSpecifiedBenchmarks();
  benchmark::Shutdown();
  return 0;
}
