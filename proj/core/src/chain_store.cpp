#include "h2s/chain_store.hpp"

#include <cmath>
#include <fstream>
#include <json.hpp>

#include "h2s/io.hpp"

namespace h2s {

ParamFamily& ChainStore::add_family(const std::string& name, std::vector<std::string> labels) {
  ParamFamily family;
  family.name = name;
  family.chains.resize(labels.size());
  family.labels = std::move(labels);
  families.push_back(std::move(family));
  return families.back();
}

const ParamFamily* ChainStore::find(const std::string& name) const {
  for (const auto& family : families) {
    if (family.name == name) return &family;
  }
  return nullptr;
}

void ChainStore::check() const {
  const std::int64_t expect = meta.retained();
  for (const auto& family : families) {
    if (family.labels.size() != family.chains.size()) {
      throw numerical_error("ChainStore: label/column mismatch in family " + family.name);
    }
    for (std::size_t c = 0; c < family.chains.size(); ++c) {
      const auto& column = family.chains[c];
      if (static_cast<std::int64_t>(column.size()) != expect) {
        throw numerical_error("ChainStore: family " + family.name + " column " +
                              family.labels[c] + " has " + std::to_string(column.size()) +
                              " draws, expected " + std::to_string(expect));
      }
      for (double v : column) {
        if (!std::isfinite(v)) {
          throw numerical_error("ChainStore: non-finite draw in " + family.labels[c]);
        }
      }
    }
  }
}

namespace {

nlohmann::json meta_to_json(const ChainMeta& meta) {
  nlohmann::json j;
  j["total_iters"] = meta.total_iters;
  j["burn_in"] = meta.burn_in;
  j["thin"] = meta.thin;
  j["seed"] = meta.seed;
  j["depth"] = meta.depth;
  j["sampler"] = meta.sampler;
  j["scan_order"] = meta.scan_order;
  j["init"] = meta.init;
  j["wall_seconds"] = meta.wall_seconds;
  if (meta.stage1_avg_subset_seconds >= 0.0) {
    j["stage1_avg_subset_seconds"] = meta.stage1_avg_subset_seconds;
  }
  j["config_hash"] = meta.config_hash;
  j["tool_version"] = meta.tool_version;
  return j;
}

ChainMeta meta_from_json(const nlohmann::json& j) {
  ChainMeta meta;
  meta.total_iters = j.at("total_iters").get<std::int64_t>();
  meta.burn_in = j.at("burn_in").get<std::int64_t>();
  meta.thin = j.at("thin").get<std::int64_t>();
  meta.seed = j.at("seed").get<std::uint64_t>();
  meta.depth = j.at("depth").get<int>();
  meta.sampler = j.value("sampler", "");
  meta.scan_order = j.value("scan_order", "");
  meta.init = j.value("init", "");
  meta.wall_seconds = j.value("wall_seconds", 0.0);
  meta.stage1_avg_subset_seconds = j.value("stage1_avg_subset_seconds", -1.0);
  meta.config_hash = j.value("config_hash", "");
  meta.tool_version = j.value("tool_version", "");
  return meta;
}

}  // namespace

void save_chains(const ChainStore& store, const std::filesystem::path& dir) {
  store.check();
  std::filesystem::create_directories(dir);

  nlohmann::json meta = meta_to_json(store.meta);
  meta["families"] = nlohmann::json::array();
  for (const auto& family : store.families) meta["families"].push_back(family.name);
  atomic_write_file(dir / "metadata.json", meta.dump(2) + "\n");

  for (const auto& family : store.families) {
    std::string out;
    for (std::size_t c = 0; c < family.labels.size(); ++c) {
      if (c) out += ',';
      out += family.labels[c];
    }
    out += '\n';
    const std::size_t rows = family.chains.empty() ? 0 : family.chains.front().size();
    for (std::size_t r = 0; r < rows; ++r) {
      for (std::size_t c = 0; c < family.chains.size(); ++c) {
        if (c) out += ',';
        out += format_double(family.chains[c][r]);
      }
      out += '\n';
    }
    atomic_write_file(dir / (family.name + ".csv"), out);
  }
}

ChainStore load_chains(const std::filesystem::path& dir) {
  std::ifstream meta_in(dir / "metadata.json");
  if (!meta_in) throw input_error("cannot open " + (dir / "metadata.json").string());
  nlohmann::json meta_json;
  try {
    meta_in >> meta_json;
  } catch (const nlohmann::json::exception& e) {
    throw format_error((dir / "metadata.json").string() + ": " + e.what());
  }

  ChainStore store;
  store.meta = meta_from_json(meta_json);
  for (const auto& name_json : meta_json.at("families")) {
    const std::string name = name_json.get<std::string>();
    const auto path = dir / (name + ".csv");
    std::ifstream in(path);
    if (!in) throw input_error("cannot open " + path.string());

    std::string line;
    if (!std::getline(in, line)) throw format_error(path.string() + ":1: empty file");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::vector<std::string> labels;
    std::size_t start = 0;
    for (;;) {
      const std::size_t comma = line.find(',', start);
      if (comma == std::string::npos) {
        labels.push_back(line.substr(start));
        break;
      }
      labels.push_back(line.substr(start, comma - start));
      start = comma + 1;
    }

    auto& family = store.add_family(name, labels);
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
      ++line_no;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.empty()) continue;
      const std::string where = path.string() + ":" + std::to_string(line_no);
      std::size_t field = 0;
      std::size_t pos = 0;
      for (;;) {
        const std::size_t comma = line.find(',', pos);
        const std::string token =
            comma == std::string::npos ? line.substr(pos) : line.substr(pos, comma - pos);
        if (field >= family.chains.size()) throw format_error(where + ": too many fields");
        family.chains[field].push_back(parse_double(token, where));
        ++field;
        if (comma == std::string::npos) break;
        pos = comma + 1;
      }
      if (field != family.chains.size()) throw format_error(where + ": too few fields");
    }
  }
  store.check();
  return store;
}

}  // namespace h2s
