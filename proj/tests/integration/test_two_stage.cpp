#include <doctest.h>

#include <cmath>
#include <vector>

#include "h2s/full_sampler.hpp"
#include "h2s/metrics.hpp"
#include "h2s/simulate.hpp"
#include "h2s/stage1.hpp"
#include "h2s/stage2.hpp"

// Library-level two-stage vs full-data agreement at a scale small enough
// for routine test runs. The acceptance suite runs the full desk-scale
// protocol; these runs shake out wiring and the prior-sensitivity knob.

using namespace h2s;

namespace {

struct PipelineResult {
  ChainStore full;
  ChainStore two_stage;
  MHStats mh;
};

PipelineResult run_pipeline(const ModelSpec& spec, const SimResult& sim, std::int64_t iters,
                            std::int64_t draws, std::uint64_t seed) {
  SamplerOptions full_opts;
  full_opts.total_iters = iters;
  full_opts.burn_in = iters / 10;
  full_opts.seed = seed + 1;
  ChainStore full = run_full_gibbs(sim.dataset, spec, full_opts);

  const std::vector<std::int64_t> per_group(sim.dataset.size(), draws);
  Stage1Output s1 = run_stage1_all(sim.dataset, spec, per_group, draws / 10, 1, seed + 2, 2);
  REQUIRE(s1.failures.empty());

  Stage2Options s2_opts;
  s2_opts.total_iters = iters;
  s2_opts.burn_in = iters / 10;
  s2_opts.seed = seed + 3;
  Stage2Result s2 = run_stage2(s1.banks, spec, s2_opts);
  return {std::move(full), std::move(s2.chains), std::move(s2.mh)};
}

double family_avg_d1(const ChainStore& a, const ChainStore& b, const std::string& family) {
  const ParamFamily* fa = a.find(family);
  const ParamFamily* fb = b.find(family);
  REQUIRE(fa != nullptr);
  REQUIRE(fb != nullptr);
  double sum = 0.0;
  for (std::size_t c = 0; c < fa->chains.size(); ++c) {
    sum += relative_l1(kde(fa->chains[c]), kde(fb->chains[c]));
  }
  return sum / static_cast<double>(fa->chains.size());
}

}  // namespace

TEST_CASE("two-stage posterior matches the full-data posterior (3-level)") {
  SimConfig cfg;
  cfg.depth = 3;
  cfg.n_groups = 10;
  cfg.per_group = 1000;
  cfg.true_mu = 25.0;
  cfg.true_tau2 = 1.5;
  cfg.seed = 1234;
  const SimResult sim = simulate_three_level(cfg);
  const PipelineResult r = run_pipeline(default_model_spec(3), sim, 8000, 8000, 10);

  for (const auto& family : {"mu", "tau2", "theta", "sigma2"}) {
    const double d1 = family_avg_d1(r.full, r.two_stage, family);
    CAPTURE(family);
    CHECK(d1 < 0.15);
  }
  for (const auto& gs : r.mh.groups) {
    CHECK(gs.acceptance_rate() > 0.0);
    CHECK(gs.acceptance_rate() < 1.0);
  }
}

TEST_CASE("agreement is insensitive to the stage-1 prior scale (1e4 vs 1e6)") {
  SimConfig cfg;
  cfg.depth = 3;
  cfg.n_groups = 8;
  cfg.per_group = 800;
  cfg.true_mu = 25.0;
  cfg.true_tau2 = 1.5;
  cfg.seed = 777;
  const SimResult sim = simulate_three_level(cfg);

  ModelSpec narrow = default_model_spec(3);
  narrow.stage1_theta_prior = {0.0, 1e4};
  const PipelineResult r = run_pipeline(narrow, sim, 6000, 6000, 20);
  for (const auto& family : {"mu", "tau2", "theta", "sigma2"}) {
    const double d1 = family_avg_d1(r.full, r.two_stage, family);
    CAPTURE(family);
    CHECK(d1 < 0.15);
  }
}

TEST_CASE("two-stage matches full at depth 4") {
  SimConfig cfg;
  cfg.depth = 4;
  cfg.n_groups = 6;
  cfg.cells_per_group = 4;
  cfg.per_cell = 200;
  cfg.true_mu = 25.0;
  cfg.true_tau2 = 1.5;
  cfg.seed = 4004;
  const SimResult sim = simulate_four_level(cfg);
  const PipelineResult r = run_pipeline(default_model_spec(4), sim, 6000, 6000, 30);
  for (const auto& family : {"mu", "tau2", "theta", "sigma2", "delta", "eta2"}) {
    const double d1 = family_avg_d1(r.full, r.two_stage, family);
    CAPTURE(family);
    CHECK(d1 < 0.18);
  }
}
