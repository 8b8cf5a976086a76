#ifndef H2S_FULL_SAMPLER_HPP
#define H2S_FULL_SAMPLER_HPP

#include <cstdint>
#include <vector>

#include "h2s/chain_store.hpp"
#include "h2s/model.hpp"
#include "h2s/rng.hpp"

// Reference Gibbs sampler for the complete model on the complete data.
// Every conditional is conjugate (Normal-Normal or Normal-InvGamma), so
// each block is a direct draw; sufficient statistics make a full scan
// O(#parameters) regardless of the number of observations.

namespace h2s {

/// One draw from the mu conditional given the group means:
/// Normal with precision n/tau2 + 1/prior.variance.
double draw_mu(const std::vector<double>& thetas, double tau2, const NormalPrior& prior,
               Rng& rng);

/// One draw from the tau2 conditional:
/// InvGamma(prior.shape + n/2, prior.rate + sum((theta_i - mu)^2)/2).
double draw_tau2(const std::vector<double>& thetas, double mu, const InvGammaPrior& prior,
                 Rng& rng);

/// One draw from a theta-style conditional: Normal-likelihood data summarized
/// by `stats` at observation variance `sigma2`, Normal(mu, tau2) prior.
/// Reused one level down for the delta_ij conditional at depth 4.
double draw_theta(const Moments& stats, double sigma2, double mu, double tau2, Rng& rng);

/// One draw from a sigma2-style conditional:
/// InvGamma(prior.shape + count/2, prior.rate + sse(theta)/2).
/// Reused for the eta2_ij conditional at depth 4.
double draw_sigma2(const Moments& stats, double theta, const InvGammaPrior& prior, Rng& rng);

struct SamplerOptions {
  std::int64_t total_iters = 10000;
  std::int64_t burn_in = -1;  // -1 means 10% of total_iters
  std::int64_t thin = 1;
  std::uint64_t seed = 0;

  std::int64_t effective_burn_in() const {
    return burn_in >= 0 ? burn_in : total_iters / 10;
  }
};

/// Systematic-scan Gibbs over the full model. Scan order is fixed for
/// reproducibility: mu, tau2, then groups in id order as (theta_i, sigma2_i)
/// and, at depth 4, their cells in id order as (delta_ij, eta2_ij).
/// Block updates draw from per-(group, iteration) seed substreams, so the
/// chains do not depend on how blocks would be scheduled across workers.
/// Deterministic given the seed; any non-finite draw aborts with context.
ChainStore run_full_gibbs(const std::vector<GroupData>& dataset, const ModelSpec& spec,
                          const SamplerOptions& opts);

}  // namespace h2s

#endif
