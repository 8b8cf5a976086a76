#ifndef H2S_MODEL_HPP
#define H2S_MODEL_HPP

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "h2s/errors.hpp"

namespace h2s {

struct NormalPrior {
  double mean = 0.0;
  double variance = 1.0;
};

/// Inverse-Gamma in the shape/rate convention:
///   f(x) = rate^shape / Gamma(shape) * x^-(shape+1) * exp(-rate / x),  x > 0.
/// The same convention as JAGS/BUGS "dgamma on the precision" style priors.
struct InvGammaPrior {
  double shape = 1.0;
  double rate = 1.0;
};

/// Nested Normal / Inverse-Gamma hierarchy, three or four levels deep.
///
/// depth 3:  y_ij ~ N(theta_i, sigma2_i); theta_i ~ N(mu, tau2);
///           sigma2_i ~ IG; mu ~ N; tau2 ~ IG.
/// depth 4:  adds a cell level underneath each group:
///           y_ijk ~ N(delta_ij, eta2_ij); delta_ij ~ N(theta_i, sigma2_i).
///
/// split_level is where stage 1 detaches the hierarchy: the theta_i get the
/// independent stage1_theta_prior instead of N(mu, tau2). Only the split
/// directly below the common (mu, tau2) level is supported: level 2 for
/// depth 3 and level 3 for depth 4.
struct ModelSpec {
  int depth = 3;
  int split_level = 2;
  NormalPrior hyper_mu{0.0, 1e6};
  InvGammaPrior hyper_tau2{0.1, 0.1};
  InvGammaPrior prior_sigma2{0.01, 0.01};
  InvGammaPrior prior_eta2{0.1, 0.1};  // depth 4 only
  NormalPrior stage1_theta_prior{0.0, 1e6};
};

/// Default spec for the given depth, priors as in the simulation protocol.
ModelSpec default_model_spec(int depth);

/// Throws input_error on any violated ModelSpec invariant.
void validate(const ModelSpec& spec);

/// Raw observations of one group. Depth 3 uses `values`; depth 4 keeps one
/// value sequence per cell, keyed by cell id (ordered map so layouts are
/// reproducible regardless of ingestion order).
struct GroupData {
  std::int64_t group_id = 0;
  std::vector<double> values;
  std::map<std::int64_t, std::vector<double>> cells;

  int depth() const { return cells.empty() ? 3 : 4; }
};

/// Count / sum / sum of squares; everything the Normal likelihood needs.
struct Moments {
  std::int64_t count = 0;
  double sum = 0.0;
  double sum_sq = 0.0;

  double mean() const { return sum / static_cast<double>(count); }
  /// Sum of squared residuals about theta.
  double sse(double theta) const {
    return sum_sq - 2.0 * theta * sum + static_cast<double>(count) * theta * theta;
  }
};

/// Sufficient statistics of one group: pooled moments at depth 3, one
/// Moments record per cell at depth 4.
struct GroupStats {
  std::int64_t group_id = 0;
  int depth = 3;
  Moments pooled;
  std::vector<std::pair<std::int64_t, Moments>> cells;
};

/// Current values of every model parameter at one sampler iteration.
struct ChainState {
  double mu = 0.0;
  double tau2 = 1.0;
  std::vector<double> theta;
  std::vector<double> sigma2;
  std::vector<std::vector<double>> delta;  // depth 4: [group][cell]
  std::vector<std::vector<double>> eta2;
};

/// Exact sufficient statistics of one group's data.
/// Throws input_error on an empty group or cell, or non-finite values.
GroupStats compute_stats(const GroupData& group);

std::vector<GroupStats> compute_stats(const std::vector<GroupData>& dataset);

/// Checks a dataset against a spec: nonempty, consistent depth, finite.
void validate_dataset(const std::vector<GroupData>& dataset, const ModelSpec& spec);

}  // namespace h2s

#endif
