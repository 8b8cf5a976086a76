#ifndef H2S_DENSITIES_HPP
#define H2S_DENSITIES_HPP

#include "h2s/model.hpp"

// Log-density evaluations shared by every sampler. All likelihood and MH
// arithmetic stays in log space; factors at group sizes of 10^5 underflow
// long before the ratios they feed into are formed.

namespace h2s {

/// log N(x | mean, variance). Throws domain_error if variance <= 0.
double log_normal_density(double x, double mean, double variance);

/// log IG(x | shape, rate) in the shape/rate convention of InvGammaPrior:
///   shape*log(rate) - lgamma(shape) - (shape+1)*log(x) - rate/x.
/// Throws domain_error for x <= 0 (callers that want log-zero must branch
/// themselves; silently returning -inf hides caller bugs).
double log_invgamma_density(double x, double shape, double rate);

inline double log_normal_density(double x, const NormalPrior& prior) {
  return log_normal_density(x, prior.mean, prior.variance);
}

inline double log_invgamma_density(double x, const InvGammaPrior& prior) {
  return log_invgamma_density(x, prior.shape, prior.rate);
}

/// Normal log-likelihood of one group's data from its sufficient statistics:
///   -(count/2) log(2 pi sigma2) - sse(theta) / (2 sigma2).
double log_group_likelihood(const Moments& stats, double theta, double sigma2);

}  // namespace h2s

#endif
