#include <benchmark/benchmark.h>

#include <risd2d/risd2d.hpp>

using namespace risd2d;

namespace {

struct Setup {
  StatisticalCsi csi;
  RisState ris;
  PowerAllocation alloc;
};

Setup make_setup(int n_h, int n_v, int pairs) {
  SystemGeometry g;
  g.n_h = n_h;
  g.n_v = n_v;
  g.ris_position = Vec3(30.0, 0.0, 8.0);
  place_pairs_uniform(g, pairs, Vec3(0.0, 0.0, 1.6), Vec3(60.0, 25.0, 1.6), 1);
  CsiOptions opt;
  opt.angles.seed = 2;
  Setup s{build_statistical_csi(g, opt), RisState{}, {}};
  s.ris.p_dc = dbm_to_watt(-5.0);
  s.ris.p_sw = dbm_to_watt(-10.0);
  RngStream rng(3, 0);
  std::vector<int> idx(n_h * n_v);
  for (int& t : idx) t = static_cast<int>(rng.uniform_index(8));
  s.ris.theta = phases_from_indices(idx, s.ris.bits);
  s.alloc = split_budget(1.0, s.ris, n_h * n_v, pairs);
  return s;
}

void BM_ClosedFormRate(benchmark::State& state) {
  const int side = static_cast<int>(state.range(0));
  const Setup s = make_setup(side, side, 6);
  for (auto _ : state) {
    benchmark::DoNotOptimize(ergodic_rate(s.alloc, s.csi, s.ris).sum);
  }
}
BENCHMARK(BM_ClosedFormRate)->Arg(4)->Arg(8)->Arg(16);

void BM_MonteCarloTrials(benchmark::State& state) {
  const Setup s = make_setup(8, 4, 6);
  McConfig mc;
  mc.trials = static_cast<std::uint64_t>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(ergodic_rate_mc(s.csi, s.alloc, s.ris, mc).sum);
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_MonteCarloTrials)->Arg(1000)->Unit(benchmark::kMillisecond);

void BM_GaGeneration(benchmark::State& state) {
  const Setup s = make_setup(8, 4, 6);
  const GaProblem problem{&s.csi, s.ris, s.alloc};
  GaParams params;
  params.max_iters = static_cast<int>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(evolve(problem, params).best_fitness);
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_GaGeneration)->Arg(50)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
