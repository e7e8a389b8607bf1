#include <benchmark/benchmark.h>

#include "ncfair/datagen.hpp"
#include "ncfair/fairlds.hpp"
#include "ncfair/ncpoly.hpp"
#include "ncfair/npa.hpp"
#include "ncfair/sdp.hpp"

using namespace ncfair;

namespace {

fairlds::FairModel paper_model(int T, fairlds::Mode mode) {
  return fairlds::build_model(datagen::generate_paper_dataset(1, T), fairlds::FairnessModelSpec::defaults(mode));
}

void BM_EnumerateWords(benchmark::State& state) {
  std::vector<std::string> names;
  for (int i = 0; i < state.range(0); ++i) names.push_back("x" + std::to_string(i));
  const auto vars = make_variables(names);
  for (auto _ : state) benchmark::DoNotOptimize(enumerate_words(vars, 2));
}
BENCHMARK(BM_EnumerateWords)->Arg(8)->Arg(32)->Arg(64);

void BM_BuildModel(benchmark::State& state) {
  const auto data = datagen::generate_paper_dataset(1, static_cast<int>(state.range(0)));
  const auto spec = fairlds::FairnessModelSpec::defaults(fairlds::Mode::subgroup_fair);
  for (auto _ : state) benchmark::DoNotOptimize(fairlds::build_model(data, spec));
}
BENCHMARK(BM_BuildModel)->Arg(5)->Arg(10)->Arg(20);

void BM_AssembleRelaxation(benchmark::State& state) {
  const auto model = paper_model(static_cast<int>(state.range(0)), fairlds::Mode::subgroup_fair);
  for (auto _ : state) benchmark::DoNotOptimize(assemble_sdp(model.problem, RelaxationOrder(1)));
  state.counters["moments"] = static_cast<double>(moment_count(model.layout.vars().size(), RelaxationOrder(1)));
}
BENCHMARK(BM_AssembleRelaxation)->Arg(5)->Arg(10)->Arg(20)->Unit(benchmark::kMillisecond);

// Wall time of one solve against the horizon, per mode.
void BM_SolveFair(benchmark::State& state) {
  const auto mode = static_cast<fairlds::Mode>(state.range(1));
  const auto data = datagen::generate_paper_dataset(1, static_cast<int>(state.range(0)));
  const auto spec = fairlds::FairnessModelSpec::defaults(mode);
  for (auto _ : state) {
    const auto r = fairlds::solve_fair(data, spec);
    if (!r.optimal()) state.SkipWithError("solve not optimal");
    benchmark::DoNotOptimize(r.objective_value);
  }
}
BENCHMARK(BM_SolveFair)
    ->ArgsProduct({{3, 5, 8}, {0, 1, 2}})
    ->ArgNames({"T", "mode"})
    ->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
