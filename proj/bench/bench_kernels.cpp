// Serial reference against the OpenMP path for the two heaviest sweeps.

#include <benchmark/benchmark.h>

#include <cmath>

#include "shearfree/congruence.hpp"
#include "shearfree/kernels.hpp"

namespace {

using namespace shearfree;

const congruence::Congruence& fixture() {
  static const congruence::Congruence c = [] {
    congruence::ScatteringData d;
    d.section = [](double, double) { return 0.0; };
    d.slope_l = [](double x, double) { return 0.3 * std::tanh(x); };
    d.slope_m = [](double, double y) { return 0.2 * std::tanh(y); };
    d.x_min = d.y_min = -2.0;
    d.x_max = d.y_max = 4.0;
    const auto kappa =
        congruence::solve_scattering(d, burgers::Forcing{}, burgers::Forcing{}, {0.0, 1.0, 0.5, 1.5, 0.5, 1.5});
    return congruence::build_congruence(kappa);
  }();
  return c;
}

kernels::Execution mode(const benchmark::State& state) {
  return state.range(0) == 0 ? kernels::Execution::Serial : kernels::Execution::Parallel;
}

void BM_ShearSweep(benchmark::State& state) {
  const auto& c = fixture();
  const congruence::Grid4 grid{{0.0, 1.0, 6}, {0.5, 1.5, 6}, {0.5, 1.5, 6}, {-1.0, 1.0, 5}};
  for (auto _ : state) {
    benchmark::DoNotOptimize(kernels::shear_sweep(c, grid, {}, mode(state)));
  }
  state.SetItemsProcessed(state.iterations() * static_cast<long>(grid.size()));
}

void BM_FieldSweep(benchmark::State& state) {
  const auto& c = fixture();
  const congruence::Grid3 grid{{0.0, 1.0, 11}, {0.5, 1.5, 11}, {0.5, 1.5, 11}};
  for (auto _ : state) {
    benchmark::DoNotOptimize(kernels::field_sweep(
        [&](double u, double x, double y) { return c.tangent(u, x, y)[0]; }, grid, mode(state)));
  }
  state.SetItemsProcessed(state.iterations() * static_cast<long>(grid.size()));
}

}  // namespace

BENCHMARK(BM_ShearSweep)->Arg(0)->Arg(1)->ArgName("parallel")->Unit(benchmark::kMillisecond);
BENCHMARK(BM_FieldSweep)->Arg(0)->Arg(1)->ArgName("parallel")->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
