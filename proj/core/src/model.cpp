#include "h2s/model.hpp"

#include <cmath>
#include <string>

namespace h2s {

ModelSpec default_model_spec(int depth) {
  ModelSpec spec;
  spec.depth = depth;
  spec.split_level = depth - 1;
  validate(spec);
  return spec;
}

namespace {

void require_positive(double v, const char* name) {
  if (!(v > 0.0) || !std::isfinite(v)) {
    throw input_error(std::string("ModelSpec: ") + name + " must be positive and finite");
  }
}

}  // namespace

void validate(const ModelSpec& spec) {
  if (spec.depth != 3 && spec.depth != 4) {
    throw input_error("ModelSpec: depth must be 3 or 4, got " + std::to_string(spec.depth));
  }
  if (spec.split_level < 1 || spec.split_level >= spec.depth) {
    throw input_error("ModelSpec: split_level must satisfy 1 <= split_level < depth");
  }
  // Only the split directly below (mu, tau2) is implemented.
  if (spec.split_level != spec.depth - 1) {
    throw input_error("ModelSpec: only split_level = depth - 1 is supported (2 for depth 3, 3 for depth 4)");
  }
  require_positive(spec.hyper_mu.variance, "hyper_mu.variance");
  require_positive(spec.hyper_tau2.shape, "hyper_tau2.shape");
  require_positive(spec.hyper_tau2.rate, "hyper_tau2.rate");
  require_positive(spec.prior_sigma2.shape, "prior_sigma2.shape");
  require_positive(spec.prior_sigma2.rate, "prior_sigma2.rate");
  if (spec.depth == 4) {
    require_positive(spec.prior_eta2.shape, "prior_eta2.shape");
    require_positive(spec.prior_eta2.rate, "prior_eta2.rate");
  }
  require_positive(spec.stage1_theta_prior.variance, "stage1_theta_prior.variance");
  if (!std::isfinite(spec.hyper_mu.mean) || !std::isfinite(spec.stage1_theta_prior.mean)) {
    throw input_error("ModelSpec: prior means must be finite");
  }
}

namespace {

Moments moments_of(const std::vector<double>& values, std::int64_t group_id, const char* what) {
  if (values.empty()) {
    throw input_error("group " + std::to_string(group_id) + ": empty " + what);
  }
  Moments m;
  m.count = static_cast<std::int64_t>(values.size());
  for (double v : values) {
    if (!std::isfinite(v)) {
      throw input_error("group " + std::to_string(group_id) + ": non-finite value in " + what);
    }
    m.sum += v;
    m.sum_sq += v * v;
  }
  return m;
}

}  // namespace

GroupStats compute_stats(const GroupData& group) {
  GroupStats stats;
  stats.group_id = group.group_id;
  if (group.cells.empty()) {
    stats.depth = 3;
    stats.pooled = moments_of(group.values, group.group_id, "value list");
  } else {
    stats.depth = 4;
    if (!group.values.empty()) {
      throw input_error("group " + std::to_string(group.group_id) +
                        ": has both flat values and cells");
    }
    stats.cells.reserve(group.cells.size());
    for (const auto& [cell_id, values] : group.cells) {
      stats.cells.emplace_back(
          cell_id, moments_of(values, group.group_id,
                              ("cell " + std::to_string(cell_id)).c_str()));
    }
  }
  return stats;
}

std::vector<GroupStats> compute_stats(const std::vector<GroupData>& dataset) {
  std::vector<GroupStats> out;
  out.reserve(dataset.size());
  for (const auto& group : dataset) out.push_back(compute_stats(group));
  return out;
}

void validate_dataset(const std::vector<GroupData>& dataset, const ModelSpec& spec) {
  if (dataset.empty()) throw input_error("dataset: no groups");
  for (const auto& group : dataset) {
    if (group.depth() != spec.depth) {
      throw input_error("dataset: group " + std::to_string(group.group_id) + " has depth " +
                        std::to_string(group.depth()) + " but spec.depth is " +
                        std::to_string(spec.depth));
    }
    compute_stats(group);  // throws on empty/non-finite content
  }
}

}  // namespace h2s
