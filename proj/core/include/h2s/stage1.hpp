#ifndef H2S_STAGE1_HPP
#define H2S_STAGE1_HPP

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "h2s/model.hpp"

// Stage 1 of the two-stage sampler: each group's detached model is Gibbs
// sampled independently, conditional on that group's data only, with the
// theta_i prior replaced by an independent vague prior. The retained draws
// form the group's sample bank, which stage 2 resamples as its proposal.

namespace h2s {

/// Everything stage 2 needs to know about how a bank was produced. No
/// timing lives here: bank files must be bit-identical across runs and
/// worker counts, so wall times travel in the stage-1 summary instead.
struct BankMeta {
  int depth = 3;
  NormalPrior stage1_theta_prior;
  InvGammaPrior prior_sigma2;
  InvGammaPrior prior_eta2;  // depth 4 only
  std::int64_t burn_in = 0;
  std::int64_t thin = 1;
  std::uint64_t seed = 0;
};

/// Retained stage-1 draws of one group. Row-major layout; columns are
/// "theta", "sigma2" and, at depth 4, "delta_<cell>" / "eta2_<cell>" per
/// cell in id order.
struct SampleBank {
  std::int64_t group_id = 0;
  std::int64_t rows = 0;  // the retained draw count A_i
  std::vector<std::string> columns;
  std::vector<double> draws;  // rows * columns.size(), row-major
  BankMeta meta;

  double at(std::int64_t row, std::size_t col) const {
    return draws[static_cast<std::size_t>(row) * columns.size() + col];
  }
  std::size_t column_index(const std::string& name) const;

  /// Rows >= 1, variance columns positive, payload finite, layout sane.
  void check() const;
};

struct Stage1Options {
  std::int64_t draws = 10000;  // A_i
  std::int64_t burn_in = -1;   // -1 means 10% of draws
  std::int64_t thin = 1;
  std::uint64_t seed = 0;

  std::int64_t effective_burn_in() const { return burn_in >= 0 ? burn_in : draws / 10; }
};

/// Gibbs-samples one group's detached model and retains `draws` rows after
/// burn-in. Reads nothing but `group`; deterministic given the seed, which
/// is used as-is (callers derive per-group substreams).
SampleBank run_stage1_group(const GroupData& group, const ModelSpec& spec,
                            const Stage1Options& opts);

struct GroupFailure {
  std::int64_t group_id = 0;
  std::string message;
};

struct Stage1Output {
  std::vector<SampleBank> banks;  // successful groups, dataset order
  std::vector<GroupFailure> failures;
  std::vector<double> per_group_seconds;  // aligned with banks
  double avg_subset_seconds = 0.0;
};

/// Runs every group on a local worker pool. Per-group seeds come from
/// mix_seed(master_seed, stage1 domain, group_id + 1), so the result is a
/// pure function of (dataset, spec, options) regardless of worker count or
/// scheduling. A failed group is reported; the rest still complete.
Stage1Output run_stage1_all(const std::vector<GroupData>& dataset, const ModelSpec& spec,
                            const std::vector<std::int64_t>& draws_per_group,
                            std::int64_t burn_in, std::int64_t thin, std::uint64_t master_seed,
                            int workers);

/// Bank file format (bit-exact round trip):
///   magic "H2SBANK1" | version u32 LE | group_id u64 LE | ncols u64 LE |
///   rows u64 LE | per column: name length u32 LE + UTF-8 bytes |
///   metadata JSON length u64 LE + bytes | payload f64 LE row-major.
void save_bank(const SampleBank& bank, const std::filesystem::path& path);

/// Throws format_error (naming the byte offset) on bad magic, unsupported
/// version, truncation, or non-finite payload values.
SampleBank load_bank(const std::filesystem::path& path);

}  // namespace h2s

#endif
