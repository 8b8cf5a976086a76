#include <benchmark/benchmark.h>

#include <vector>

#include "h2s/densities.hpp"
#include "h2s/full_sampler.hpp"
#include "h2s/metrics.hpp"
#include "h2s/rng.hpp"
#include "h2s/simulate.hpp"
#include "h2s/stage1.hpp"
#include "h2s/stage2.hpp"

namespace {

h2s::SimResult desk_sim(int n_groups, int per_group) {
  h2s::SimConfig cfg;
  cfg.depth = 3;
  cfg.n_groups = n_groups;
  cfg.per_group = per_group;
  cfg.seed = 42;
  return h2s::simulate_three_level(cfg);
}

void BM_log_normal_density(benchmark::State& state) {
  double x = 0.1;
  for (auto _ : state) {
    benchmark::DoNotOptimize(h2s::log_normal_density(x, 25.0, 1.5));
    x += 1e-9;
  }
}
BENCHMARK(BM_log_normal_density);

void BM_log_group_likelihood(benchmark::State& state) {
  h2s::Moments stats;
  stats.count = 100000;
  stats.sum = 100000.0 * 25.0;
  stats.sum_sq = 100000.0 * 635.0;
  double theta = 24.9;
  for (auto _ : state) {
    benchmark::DoNotOptimize(h2s::log_group_likelihood(stats, theta, 10.0));
    theta += 1e-9;
  }
}
BENCHMARK(BM_log_group_likelihood);

void BM_draw_normal(benchmark::State& state) {
  h2s::Rng rng(7);
  for (auto _ : state) {
    benchmark::DoNotOptimize(h2s::draw_normal(rng, 0.0, 1.0));
  }
}
BENCHMARK(BM_draw_normal);

void BM_draw_inv_gamma(benchmark::State& state) {
  h2s::Rng rng(7);
  for (auto _ : state) {
    benchmark::DoNotOptimize(h2s::draw_inv_gamma(rng, 50.0, 500.0));
  }
}
BENCHMARK(BM_draw_inv_gamma);

void BM_full_gibbs(benchmark::State& state) {
  const auto sim = desk_sim(static_cast<int>(state.range(0)), 2000);
  const h2s::ModelSpec spec = h2s::default_model_spec(3);
  h2s::SamplerOptions opts;
  opts.total_iters = 200;
  opts.burn_in = 0;
  opts.seed = 1;
  for (auto _ : state) {
    benchmark::DoNotOptimize(h2s::run_full_gibbs(sim.dataset, spec, opts));
  }
  state.SetItemsProcessed(state.iterations() * opts.total_iters);
}
BENCHMARK(BM_full_gibbs)->Arg(5)->Arg(20)->Arg(50);

void BM_stage1_group(benchmark::State& state) {
  const auto sim = desk_sim(1, static_cast<int>(state.range(0)));
  const h2s::ModelSpec spec = h2s::default_model_spec(3);
  h2s::Stage1Options opts;
  opts.draws = 2000;
  opts.burn_in = 200;
  opts.seed = 3;
  for (auto _ : state) {
    benchmark::DoNotOptimize(h2s::run_stage1_group(sim.dataset[0], spec, opts));
  }
  state.SetItemsProcessed(state.iterations() * opts.draws);
}
BENCHMARK(BM_stage1_group)->Arg(2000)->Arg(100000);

void BM_mh_group_update(benchmark::State& state) {
  const auto sim = desk_sim(1, 2000);
  h2s::Stage1Options s1_opts;
  s1_opts.draws = 20000;
  s1_opts.burn_in = 2000;
  s1_opts.seed = 3;
  const h2s::SampleBank bank =
      h2s::run_stage1_group(sim.dataset[0], h2s::default_model_spec(3), s1_opts);
  std::vector<double> block = {bank.at(0, 0), bank.at(0, 1)};
  h2s::Rng rng(9);
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        h2s::mh_group_update(block, bank, 25.0, 1.5, h2s::RatioMode::exact, rng));
  }
}
BENCHMARK(BM_mh_group_update);

void BM_kde(benchmark::State& state) {
  h2s::Rng rng(5);
  std::vector<double> samples(static_cast<std::size_t>(state.range(0)));
  for (auto& s : samples) s = h2s::draw_normal(rng, 25.0, 1.5);
  for (auto _ : state) {
    benchmark::DoNotOptimize(h2s::kde(samples, 512));
  }
}
BENCHMARK(BM_kde)->Arg(2000)->Arg(18000);

void BM_relative_l1(benchmark::State& state) {
  h2s::Rng rng(5);
  std::vector<double> a(18000), b(18000);
  for (auto& s : a) s = h2s::draw_normal(rng, 25.0, 1.5);
  for (auto& s : b) s = h2s::draw_normal(rng, 25.1, 1.5);
  const h2s::DensityEstimate p = h2s::kde(a);
  const h2s::DensityEstimate q = h2s::kde(b);
  for (auto _ : state) {
    benchmark::DoNotOptimize(h2s::relative_l1(p, q));
  }
}
BENCHMARK(BM_relative_l1);

}  // namespace

BENCHMARK_MAIN();
