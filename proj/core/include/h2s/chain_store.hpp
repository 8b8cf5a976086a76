#ifndef H2S_CHAIN_STORE_HPP
#define H2S_CHAIN_STORE_HPP

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "h2s/errors.hpp"

namespace h2s {

/// Retained draws of one parameter family ("theta" holds one column per
/// group, "delta" one per (group, cell), "mu" exactly one).
struct ParamFamily {
  std::string name;
  std::vector<std::string> labels;          // one per column
  std::vector<std::vector<double>> chains;  // [column][draw]
};

struct ChainMeta {
  std::int64_t total_iters = 0;
  std::int64_t burn_in = 0;
  std::int64_t thin = 1;
  std::uint64_t seed = 0;
  int depth = 3;
  std::string sampler;     // "full-gibbs" or "stage2-mh-within-gibbs"
  std::string scan_order;  // documented for auditability
  std::string init;
  double wall_seconds = 0.0;
  // Stage-2 stores carry the stage-1 per-subset average so a comparison
  // report can assemble the two-stage total without the banks on hand.
  double stage1_avg_subset_seconds = -1.0;
  std::string config_hash;
  std::string tool_version;

  std::int64_t retained() const { return (total_iters - burn_in) / thin; }
};

/// Full retained trace of one sampler run.
struct ChainStore {
  ChainMeta meta;
  std::vector<ParamFamily> families;

  ParamFamily& add_family(const std::string& name, std::vector<std::string> labels);
  const ParamFamily* find(const std::string& name) const;

  /// Equal lengths across every column, no NaN/Inf. Throws on violation.
  void check() const;
};

/// Persists as one CSV per family (header = labels, full double precision)
/// plus metadata.json in `dir`.
void save_chains(const ChainStore& store, const std::filesystem::path& dir);

ChainStore load_chains(const std::filesystem::path& dir);

}  // namespace h2s

#endif
