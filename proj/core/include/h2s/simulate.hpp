#ifndef H2S_SIMULATE_HPP
#define H2S_SIMULATE_HPP

#include <cstdint>
#include <vector>

#include "h2s/model.hpp"

namespace h2s {

/// Synthetic-data protocol: group means from N(true_mu, true_tau2), group
/// variances from a positive-truncated Normal(sigma2_mean, sigma2_var).
struct SimConfig {
  int depth = 3;
  std::int64_t n_groups = 20;
  std::int64_t per_group = 2000;        // m_i, uniform unless overridden
  std::vector<std::int64_t> per_group_counts;  // optional per-group m_i
  std::int64_t cells_per_group = 7;     // depth 4
  std::int64_t per_cell = 500;          // depth 4
  double true_mu = 25.0;
  double true_tau2 = 1.5;
  double sigma2_mean = 10.0;
  double sigma2_var = 1.0;
  std::uint64_t seed = 0;
};

void validate(const SimConfig& cfg);

struct SimResult {
  std::vector<GroupData> dataset;
  ChainState truth;  // the generating parameter values
};

/// Three-level draw: theta_i ~ N(mu, tau2), sigma2_i ~ N+(m, v) by
/// rejection, y_ij ~ N(theta_i, sigma2_i). Each group generates from its
/// own seed substream, so output is a pure function of cfg.
SimResult simulate_three_level(const SimConfig& cfg);

/// Four-level analog: delta_ij ~ N(theta_i, sigma2_i), eta2_ij from a
/// positive-truncated Normal at a tenth of the sigma2 scale, y_ijk ~
/// N(delta_ij, eta2_ij).
SimResult simulate_four_level(const SimConfig& cfg);

/// Dispatches on cfg.depth.
SimResult simulate(const SimConfig& cfg);

}  // namespace h2s

#endif
