#include "h2s/io.hpp"

#include <atomic>
#include <cerrno>
#include <charconv>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <system_error>

namespace h2s {

namespace {
std::atomic<std::uint64_t> g_dataset_reads{0};
}

std::string format_double(double v) {
  char buf[40];
  // 17 significant digits round-trip any finite double.
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

double parse_double(const std::string& token, const std::string& where) {
  double value = 0.0;
  const char* first = token.data();
  const char* last = token.data() + token.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc{} || ptr != last) {
    throw format_error(where + ": expected a number, got '" + token + "'");
  }
  return value;
}

std::int64_t parse_int(const std::string& token, const std::string& where) {
  std::int64_t value = 0;
  const char* first = token.data();
  const char* last = token.data() + token.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc{} || ptr != last) {
    throw format_error(where + ": expected an integer, got '" + token + "'");
  }
  return value;
}

void atomic_write_file(const std::filesystem::path& path, const std::string& content) {
  namespace fs = std::filesystem;
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw format_error("cannot open " + tmp.string() + " for writing");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw format_error("short write to " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) throw format_error("rename " + tmp.string() + " -> " + path.string() + ": " + ec.message());
}

void write_dataset_csv(const std::vector<GroupData>& dataset, const std::filesystem::path& path) {
  if (dataset.empty()) throw input_error("write_dataset_csv: empty dataset");
  const int depth = dataset.front().depth();
  std::string out;
  out.reserve(dataset.size() * 16);
  out += depth == 3 ? "group_id,value\n" : "group_id,cell_id,value\n";
  for (const auto& group : dataset) {
    if (group.depth() != depth) throw input_error("write_dataset_csv: mixed-depth dataset");
    const std::string gid = std::to_string(group.group_id);
    if (depth == 3) {
      for (double v : group.values) {
        out += gid;
        out += ',';
        out += format_double(v);
        out += '\n';
      }
    } else {
      for (const auto& [cell_id, values] : group.cells) {
        const std::string cid = std::to_string(cell_id);
        for (double v : values) {
          out += gid;
          out += ',';
          out += cid;
          out += ',';
          out += format_double(v);
          out += '\n';
        }
      }
    }
  }
  atomic_write_file(path, out);
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  for (;;) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string::npos) {
      fields.push_back(line.substr(start));
      break;
    }
    fields.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
  return fields;
}

}  // namespace

std::vector<GroupData> read_dataset_csv(const std::filesystem::path& path) {
  g_dataset_reads.fetch_add(1, std::memory_order_relaxed);
  std::ifstream in(path);
  if (!in) throw input_error("cannot open dataset file " + path.string());

  std::string line;
  if (!std::getline(in, line)) throw format_error(path.string() + ":1: empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();

  int depth = 0;
  if (line == "group_id,value") {
    depth = 3;
  } else if (line == "group_id,cell_id,value") {
    depth = 4;
  } else {
    throw format_error(path.string() +
                       ":1: header must be 'group_id,value' or 'group_id,cell_id,value'");
  }

  std::map<std::int64_t, GroupData> groups;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::string where = path.string() + ":" + std::to_string(line_no);
    const auto fields = split_csv_line(line);
    if (static_cast<int>(fields.size()) != (depth == 3 ? 2 : 3)) {
      throw format_error(where + ": expected " + std::to_string(depth == 3 ? 2 : 3) +
                         " fields, got " + std::to_string(fields.size()));
    }
    const std::int64_t gid = parse_int(fields[0], where);
    const double value = parse_double(fields.back(), where);
    if (!std::isfinite(value)) throw format_error(where + ": non-finite value");
    auto& group = groups[gid];
    group.group_id = gid;
    if (depth == 3) {
      group.values.push_back(value);
    } else {
      const std::int64_t cid = parse_int(fields[1], where);
      group.cells[cid].push_back(value);
    }
  }
  if (groups.empty()) throw format_error(path.string() + ": no data rows");

  std::vector<GroupData> dataset;
  dataset.reserve(groups.size());
  for (auto& [gid, group] : groups) dataset.push_back(std::move(group));
  return dataset;
}

std::uint64_t dataset_read_count() { return g_dataset_reads.load(std::memory_order_relaxed); }

std::string fnv1a_hex(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016" PRIx64, h);
  return buf;
}

}  // namespace h2s
