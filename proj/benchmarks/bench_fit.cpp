#include <benchmark/benchmark.h>

#include "mpple/influence.hpp"
#include "mpple/missingness.hpp"
#include "mpple/mpple_fit.hpp"
#include "mpple/simulation.hpp"

using namespace mpple;

namespace {

Dataset make_cohort(int n) {
  ScenarioConfig cfg;
  cfg.scenario = 1;
  cfg.n = n;
  cfg.seed = 1;
  return generate_dataset(cfg, 0);
}

void BM_FullFit(benchmark::State& state) {
  const Dataset ds = make_cohort(static_cast<int>(state.range(0)));
  const auto grammar = TermGrammar::parse({"1", "t", "z1", "z2"}, ds);
  for (auto _ : state) {
    const auto mfit = fit_cause_probability(ds, grammar);
    const auto cfit = fit_mpple(ds, mfit);
    benchmark::DoNotOptimize(cfit.cause(1).beta);
  }
}
BENCHMARK(BM_FullFit)->Arg(400)->Arg(2000)->Arg(6657);

void BM_FitWithStandardErrors(benchmark::State& state) {
  const Dataset ds = make_cohort(static_cast<int>(state.range(0)));
  const auto grammar = TermGrammar::parse({"1", "t", "z1", "z2"}, ds);
  for (auto _ : state) {
    const auto mfit = fit_cause_probability(ds, grammar);
    const auto cfit = fit_mpple(ds, mfit);
    for (int j = 1; j <= 2; ++j) {
      const auto bi = compute_beta_influence(ds, mfit, cfit, j);
      benchmark::DoNotOptimize(bi.se);
    }
  }
}
BENCHMARK(BM_FitWithStandardErrors)->Arg(400)->Arg(2000)->Arg(6657);

void BM_CumhazInfluence(benchmark::State& state) {
  const Dataset ds = make_cohort(static_cast<int>(state.range(0)));
  const auto grammar = TermGrammar::parse({"1", "t", "z1", "z2"}, ds);
  const auto mfit = fit_cause_probability(ds, grammar);
  const auto cfit = fit_mpple(ds, mfit);
  const auto bi = compute_beta_influence(ds, mfit, cfit, 1);
  for (auto _ : state) {
    const auto ci = compute_cumhaz_influence(ds, mfit, cfit, 1, bi);
    benchmark::DoNotOptimize(ci.sigma);
  }
}
BENCHMARK(BM_CumhazInfluence)->Arg(400)->Arg(2000);

}  // namespace

BENCHMARK_MAIN();
