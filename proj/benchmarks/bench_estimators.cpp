#include <benchmark/benchmark.h>

#include <random>

#include "mdest/first_stage.hpp"
#include "mdest/gmm_estimator.hpp"
#include "mdest/md_estimator.hpp"
#include "mdest/moments.hpp"
#include "mdest/simlab/monte_carlo.hpp"
#include "mdest/simlab/plim.hpp"
#include "mdest/simlab/scenario.hpp"
#include "mdest/simlab/simulate.hpp"

namespace sim = mdest::sim;

namespace {

struct Panel {
  std::vector<mdest::GroupSample> samples;
  std::vector<mdest::MomentAverages> averages;
  std::vector<mdest::GroupEstimate> estimates;
  std::vector<Eigen::VectorXd> policies;
};

Panel make_panel(std::size_t groups, std::size_t n) {
  std::mt19937_64 eng(11);
  std::normal_distribution<double> z;
  std::bernoulli_distribution coin(0.5);
  Panel p;
  for (std::size_t g = 0; g < groups; ++g) {
    const double w = static_cast<double>(g % 3);
    std::vector<mdest::UnitMoment> units;
    units.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
      const bool e = coin(eng);
      units.push_back(mdest::build_did_unit(0.2 + (e ? 1.0 + 0.5 * w : 0.0) + z(eng), e ? 1.0 : 0.0));
    }
    p.samples.emplace_back("g" + std::to_string(g), std::move(units));
    p.averages.push_back(mdest::average_moments(p.samples.back()));
    p.estimates.push_back(mdest::estimate_group(p.samples.back()));
    p.policies.push_back(Eigen::VectorXd::Constant(1, w));
  }
  return p;
}

void BM_AverageMoments(benchmark::State& st) {
  const Panel p = make_panel(1, static_cast<std::size_t>(st.range(0)));
  for (auto _ : st) benchmark::DoNotOptimize(mdest::average_moments(p.samples[0]));
  st.SetItemsProcessed(st.iterations() * st.range(0));
}
BENCHMARK(BM_AverageMoments)->Arg(100)->Arg(10000);

void BM_FitMd(benchmark::State& st) {
  const Panel p = make_panel(static_cast<std::size_t>(st.range(0)), 20);
  const auto spec = mdest::presets::effect_row_design(1);
  for (auto _ : st) benchmark::DoNotOptimize(mdest::fit_md(p.estimates, p.policies, spec));
}
BENCHMARK(BM_FitMd)->Arg(100)->Arg(1000)->Arg(10000);

void BM_FitGmmPooled(benchmark::State& st) {
  const Panel p = make_panel(static_cast<std::size_t>(st.range(0)), 20);
  const auto spec = mdest::presets::effect_row_design(1);
  for (auto _ : st) benchmark::DoNotOptimize(mdest::fit_gmm_pooled(p.averages, p.policies, spec));
}
BENCHMARK(BM_FitGmmPooled)->Arg(100)->Arg(1000)->Arg(10000);

void BM_Simulate(benchmark::State& st) {
  auto c = sim::scenario_preset("gmm_bias_demo");
  c.groups = static_cast<std::size_t>(st.range(0));
  std::size_t r = 1;
  for (auto _ : st) benchmark::DoNotOptimize(sim::simulate(c, r++));
}
BENCHMARK(BM_Simulate)->Arg(500)->Arg(2000)->Unit(benchmark::kMillisecond);

void BM_Replication(benchmark::State& st) {
  const auto c = sim::scenario_preset("gmm_bias_demo");
  const std::vector<sim::Estimator> est{sim::Estimator::md, sim::Estimator::gmm};
  const auto data = sim::simulate(c, 1);
  for (auto _ : st) benchmark::DoNotOptimize(sim::run_estimators(c, data, est, 1));
}
BENCHMARK(BM_Replication)->Unit(benchmark::kMillisecond);

void BM_GmmPlim(benchmark::State& st) {
  const auto c = sim::scenario_preset("selection_demo");
  for (auto _ : st) benchmark::DoNotOptimize(mdest::gmm_plim(sim::induced_scenario(c, sim::PlimTarget::md)));
}
BENCHMARK(BM_GmmPlim);

}  // namespace

BENCHMARK_MAIN();
