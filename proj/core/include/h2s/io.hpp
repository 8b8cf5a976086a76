#ifndef H2S_IO_HPP
#define H2S_IO_HPP

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "h2s/model.hpp"

namespace h2s {

/// Shortest decimal form that round-trips a double exactly.
std::string format_double(double v);

/// Strict double parse of a whole token; throws format_error on junk.
double parse_double(const std::string& token, const std::string& where);
std::int64_t parse_int(const std::string& token, const std::string& where);

/// Writes content to a temp file in the target directory, then renames.
void atomic_write_file(const std::filesystem::path& path, const std::string& content);

/// Datasets travel as CSV: header "group_id,value" (depth 3) or
/// "group_id,cell_id,value" (depth 4), one observation per row. Values are
/// whatever transform the user already applied; none is applied here.
void write_dataset_csv(const std::vector<GroupData>& dataset, const std::filesystem::path& path);

/// Parses and validates a dataset CSV. Errors carry the 1-based line number.
/// Every call bumps the dataset-read counter (the stage-2 data-freedom
/// property is asserted against that counter in tests).
std::vector<GroupData> read_dataset_csv(const std::filesystem::path& path);

/// Process-wide count of dataset file reads.
std::uint64_t dataset_read_count();

/// 64-bit FNV-1a, hex-encoded; used to fingerprint configs in output metadata.
std::string fnv1a_hex(const std::string& bytes);

}  // namespace h2s

#endif
