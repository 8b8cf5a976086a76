#ifndef H2S_STAGE2_HPP
#define H2S_STAGE2_HPP

#include <cstdint>
#include <vector>

#include "h2s/chain_store.hpp"
#include "h2s/model.hpp"
#include "h2s/rng.hpp"
#include "h2s/stage1.hpp"

// Stage 2 reconstructs the full-model posterior without touching any data:
// mu and tau2 are drawn from their conjugate conditionals given the current
// thetas, and each group block is updated by a Metropolis-Hastings step
// whose candidate is a uniformly resampled stage-1 bank row. The likelihood
// and all level-1..c_s parameters cancel in the acceptance ratio, which
// therefore involves only the two theta priors.

namespace h2s {

enum class RatioMode {
  exact,    // keeps the stage-1 theta prior correction terms
  uniform,  // treats the stage-1 theta prior as flat and drops them
};

/// Log MH acceptance ratio for swapping theta_prev -> theta_cand:
///   log p(cand | mu, tau2) - log p(prev | mu, tau2)
///   + [exact mode] log p_stage1(prev) - log p_stage1(cand).
/// Identical candidate and previous values give exactly 0 in both modes.
/// The ratio involves no sigma2 (or delta/eta2) terms at any depth.
double log_accept_ratio(double theta_cand, double theta_prev, double mu, double tau2,
                        const NormalPrior& stage1_prior, RatioMode mode);

/// One MH update of a group block. `block` holds the group's current values
/// in bank column order; on accept the whole candidate row replaces it.
/// Consumes exactly one row index and one uniform from `rng` either way.
bool mh_group_update(std::vector<double>& block, const SampleBank& bank, double mu, double tau2,
                     RatioMode mode, Rng& rng);

struct GroupMHStats {
  std::int64_t group_id = 0;
  std::int64_t proposals = 0;
  std::int64_t accepts = 0;

  double acceptance_rate() const {
    return proposals > 0 ? static_cast<double>(accepts) / static_cast<double>(proposals) : 0.0;
  }
};

struct MHStats {
  std::vector<GroupMHStats> groups;
};

struct Stage2Options {
  std::int64_t total_iters = 10000;
  std::int64_t burn_in = -1;  // -1 means 10% of total_iters
  std::int64_t thin = 1;
  std::uint64_t seed = 0;
  RatioMode mode = RatioMode::exact;

  std::int64_t effective_burn_in() const {
    return burn_in >= 0 ? burn_in : total_iters / 10;
  }
};

struct Stage2Result {
  ChainStore chains;
  MHStats mh;
};

/// Full stage-2 run over one bank per group. Initialization: each block
/// starts at a uniformly drawn bank row; tau2 starts at the sample variance
/// of the initial thetas (floored at 1e-6); mu is drawn first, conditional
/// on those. Per-(group, iteration) RNG substreams keep the chains
/// independent of any within-iteration scheduling. Deterministic given seed.
Stage2Result run_stage2(const std::vector<SampleBank>& banks, const ModelSpec& spec,
                        const Stage2Options& opts);

}  // namespace h2s

#endif
