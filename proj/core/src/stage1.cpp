#include "h2s/stage1.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstring>
#include <fstream>
#include <json.hpp>
#include <thread>

#include "h2s/full_sampler.hpp"
#include "h2s/io.hpp"
#include "h2s/rng.hpp"

namespace h2s {

std::size_t SampleBank::column_index(const std::string& name) const {
  for (std::size_t c = 0; c < columns.size(); ++c) {
    if (columns[c] == name) return c;
  }
  throw input_error("bank for group " + std::to_string(group_id) + ": no column '" + name + "'");
}

void SampleBank::check() const {
  if (rows < 1) throw input_error("bank: rows must be >= 1");
  if (columns.size() < 2) throw input_error("bank: need at least theta and sigma2 columns");
  if (draws.size() != static_cast<std::size_t>(rows) * columns.size()) {
    throw input_error("bank: payload size does not match rows x columns");
  }
  for (std::size_t c = 0; c < columns.size(); ++c) {
    const bool variance_column =
        columns[c] == "sigma2" || columns[c].rfind("eta2_", 0) == 0;
    for (std::int64_t r = 0; r < rows; ++r) {
      const double v = at(r, c);
      if (!std::isfinite(v)) {
        throw input_error("bank: non-finite draw in column " + columns[c]);
      }
      if (variance_column && !(v > 0.0)) {
        throw input_error("bank: non-positive variance draw in column " + columns[c]);
      }
    }
  }
}

SampleBank run_stage1_group(const GroupData& group, const ModelSpec& spec,
                            const Stage1Options& opts) {
  validate(spec);
  if (opts.draws < 1) throw input_error("stage1: draws (A_i) must be >= 1");
  if (opts.thin < 1) throw input_error("stage1: thin must be >= 1");
  const std::int64_t burn_in = opts.effective_burn_in();
  if (burn_in < 0) throw input_error("stage1: burn_in must be >= 0");
  const GroupStats stats = compute_stats(group);
  if (stats.depth != spec.depth) {
    throw input_error("stage1: group " + std::to_string(group.group_id) + " depth " +
                      std::to_string(stats.depth) + " != spec depth " +
                      std::to_string(spec.depth));
  }

  SampleBank bank;
  bank.group_id = group.group_id;
  bank.rows = opts.draws;
  bank.meta.depth = spec.depth;
  bank.meta.stage1_theta_prior = spec.stage1_theta_prior;
  bank.meta.prior_sigma2 = spec.prior_sigma2;
  bank.meta.prior_eta2 = spec.prior_eta2;
  bank.meta.burn_in = burn_in;
  bank.meta.thin = opts.thin;
  bank.meta.seed = opts.seed;

  bank.columns = {"theta", "sigma2"};
  if (spec.depth == 4) {
    for (const auto& [cid, m] : stats.cells) {
      bank.columns.push_back("delta_" + std::to_string(cid));
    }
    for (const auto& [cid, m] : stats.cells) {
      bank.columns.push_back("eta2_" + std::to_string(cid));
    }
  }
  bank.draws.resize(static_cast<std::size_t>(bank.rows) * bank.columns.size());

  Rng rng(opts.seed);
  const NormalPrior& tp = spec.stage1_theta_prior;

  if (spec.depth == 3) {
    // Detached model: theta ~ stage1 prior, sigma2 ~ IG prior, two-block Gibbs.
    double theta = stats.pooled.mean();
    double sigma2 = std::max(stats.pooled.sse(theta) /
                                 static_cast<double>(stats.pooled.count > 1
                                                         ? stats.pooled.count - 1
                                                         : 1),
                             1e-6);
    const std::int64_t total = burn_in + opts.draws * opts.thin;
    std::int64_t next_row = 0;
    for (std::int64_t t = 1; t <= total; ++t) {
      theta = draw_theta(stats.pooled, sigma2, tp.mean, tp.variance, rng);
      sigma2 = draw_sigma2(stats.pooled, theta, spec.prior_sigma2, rng);
      if (!std::isfinite(theta) || !std::isfinite(sigma2)) {
        throw numerical_error("stage1: non-finite draw in group " +
                              std::to_string(group.group_id) + " at iteration " +
                              std::to_string(t));
      }
      if (t > burn_in && (t - burn_in) % opts.thin == 0) {
        const auto base = static_cast<std::size_t>(next_row) * bank.columns.size();
        bank.draws[base] = theta;
        bank.draws[base + 1] = sigma2;
        ++next_row;
      }
    }
  } else {
    const std::size_t m = stats.cells.size();
    std::vector<double> delta(m), eta2(m);
    for (std::size_t c = 0; c < m; ++c) {
      const Moments& cm = stats.cells[c].second;
      delta[c] = cm.mean();
      eta2[c] = std::max(
          cm.sse(delta[c]) / static_cast<double>(cm.count > 1 ? cm.count - 1 : 1), 1e-6);
    }
    Moments dm;
    dm.count = static_cast<std::int64_t>(m);
    for (double d : delta) {
      dm.sum += d;
      dm.sum_sq += d * d;
    }
    double theta = dm.mean();
    double sigma2 =
        std::max(dm.sse(theta) / static_cast<double>(m > 1 ? m - 1 : 1), 1e-6);

    const std::int64_t total = burn_in + opts.draws * opts.thin;
    std::int64_t next_row = 0;
    for (std::int64_t t = 1; t <= total; ++t) {
      dm = Moments{};
      dm.count = static_cast<std::int64_t>(m);
      for (double d : delta) {
        dm.sum += d;
        dm.sum_sq += d * d;
      }
      theta = draw_theta(dm, sigma2, tp.mean, tp.variance, rng);
      sigma2 = draw_sigma2(dm, theta, spec.prior_sigma2, rng);
      for (std::size_t c = 0; c < m; ++c) {
        const Moments& cm = stats.cells[c].second;
        delta[c] = draw_theta(cm, eta2[c], theta, sigma2, rng);
        eta2[c] = draw_sigma2(cm, delta[c], spec.prior_eta2, rng);
      }
      if (!std::isfinite(theta) || !std::isfinite(sigma2)) {
        throw numerical_error("stage1: non-finite draw in group " +
                              std::to_string(group.group_id) + " at iteration " +
                              std::to_string(t));
      }
      if (t > burn_in && (t - burn_in) % opts.thin == 0) {
        const auto base = static_cast<std::size_t>(next_row) * bank.columns.size();
        bank.draws[base] = theta;
        bank.draws[base + 1] = sigma2;
        for (std::size_t c = 0; c < m; ++c) {
          bank.draws[base + 2 + c] = delta[c];
          bank.draws[base + 2 + m + c] = eta2[c];
        }
        ++next_row;
      }
    }
  }

  bank.check();
  return bank;
}

Stage1Output run_stage1_all(const std::vector<GroupData>& dataset, const ModelSpec& spec,
                            const std::vector<std::int64_t>& draws_per_group,
                            std::int64_t burn_in, std::int64_t thin, std::uint64_t master_seed,
                            int workers) {
  validate(spec);
  if (dataset.empty()) throw input_error("stage1: empty dataset");
  if (draws_per_group.size() != dataset.size()) {
    throw input_error("stage1: draws_per_group length " +
                      std::to_string(draws_per_group.size()) + " != group count " +
                      std::to_string(dataset.size()));
  }
  if (workers < 1) throw input_error("stage1: workers must be >= 1");

  const std::size_t n = dataset.size();
  std::vector<SampleBank> banks(n);
  std::vector<double> seconds(n, 0.0);
  std::vector<std::string> errors(n);
  std::vector<char> failed(n, 0);

  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (;;) {
      const std::size_t g = next.fetch_add(1);
      if (g >= n) return;
      Stage1Options opts;
      opts.draws = draws_per_group[g];
      opts.burn_in = burn_in;
      opts.thin = thin;
      opts.seed = mix_seed(master_seed, seed_domain::stage1,
                           static_cast<std::uint64_t>(dataset[g].group_id) + 1);
      try {
        const auto t0 = std::chrono::steady_clock::now();
        banks[g] = run_stage1_group(dataset[g], spec, opts);
        seconds[g] =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      } catch (const std::exception& e) {
        failed[g] = 1;
        errors[g] = e.what();
      }
    }
  };

  const auto nthreads = static_cast<std::size_t>(
      std::min<std::int64_t>(workers, static_cast<std::int64_t>(n)));
  if (nthreads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(nthreads);
    for (std::size_t i = 0; i < nthreads; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  Stage1Output out;
  for (std::size_t g = 0; g < n; ++g) {
    if (failed[g]) {
      out.failures.push_back({dataset[g].group_id, errors[g]});
    } else {
      out.per_group_seconds.push_back(seconds[g]);
      out.banks.push_back(std::move(banks[g]));
    }
  }
  if (!out.per_group_seconds.empty()) {
    double sum = 0.0;
    for (double s : out.per_group_seconds) sum += s;
    out.avg_subset_seconds = sum / static_cast<double>(out.per_group_seconds.size());
  }
  return out;
}

// --- bank file I/O ---------------------------------------------------------

namespace {

constexpr char kMagic[8] = {'H', '2', 'S', 'B', 'A', 'N', 'K', '1'};
constexpr std::uint32_t kVersion = 1;

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_u64(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_f64(std::string& out, double v) {
  std::uint64_t bits;
  std::memcpy(&bits, &v, sizeof bits);
  put_u64(out, bits);
}

class Reader {
public:
  Reader(const std::string& bytes, std::string path)
      : bytes_(bytes), path_(std::move(path)) {}

  std::size_t offset() const { return pos_; }

  void read_bytes(void* dst, std::size_t count, const char* what) {
    if (pos_ + count > bytes_.size()) {
      throw format_error(path_ + ": truncated while reading " + std::string(what) +
                         " at offset " + std::to_string(pos_));
    }
    std::memcpy(dst, bytes_.data() + pos_, count);
    pos_ += count;
  }

  std::uint32_t read_u32(const char* what) {
    unsigned char b[4];
    read_bytes(b, 4, what);
    std::uint32_t v = 0;
    for (int i = 3; i >= 0; --i) v = (v << 8) | b[i];
    return v;
  }

  std::uint64_t read_u64(const char* what) {
    unsigned char b[8];
    read_bytes(b, 8, what);
    std::uint64_t v = 0;
    for (int i = 7; i >= 0; --i) v = (v << 8) | b[i];
    return v;
  }

  double read_f64(const char* what) {
    const std::uint64_t bits = read_u64(what);
    double v;
    std::memcpy(&v, &bits, sizeof v);
    return v;
  }

  std::string read_string(std::size_t len, const char* what) {
    std::string s(len, '\0');
    read_bytes(s.data(), len, what);
    return s;
  }

private:
  const std::string& bytes_;
  std::string path_;
  std::size_t pos_ = 0;
};

nlohmann::json bank_meta_to_json(const BankMeta& meta) {
  nlohmann::json j;
  j["depth"] = meta.depth;
  j["stage1_theta_prior"] = {{"mean", meta.stage1_theta_prior.mean},
                             {"variance", meta.stage1_theta_prior.variance}};
  j["prior_sigma2"] = {{"shape", meta.prior_sigma2.shape}, {"rate", meta.prior_sigma2.rate}};
  j["prior_eta2"] = {{"shape", meta.prior_eta2.shape}, {"rate", meta.prior_eta2.rate}};
  j["burn_in"] = meta.burn_in;
  j["thin"] = meta.thin;
  j["seed"] = meta.seed;
  return j;
}

BankMeta bank_meta_from_json(const nlohmann::json& j, const std::string& path) {
  try {
    BankMeta meta;
    meta.depth = j.at("depth").get<int>();
    meta.stage1_theta_prior.mean = j.at("stage1_theta_prior").at("mean").get<double>();
    meta.stage1_theta_prior.variance = j.at("stage1_theta_prior").at("variance").get<double>();
    meta.prior_sigma2.shape = j.at("prior_sigma2").at("shape").get<double>();
    meta.prior_sigma2.rate = j.at("prior_sigma2").at("rate").get<double>();
    meta.prior_eta2.shape = j.at("prior_eta2").at("shape").get<double>();
    meta.prior_eta2.rate = j.at("prior_eta2").at("rate").get<double>();
    meta.burn_in = j.at("burn_in").get<std::int64_t>();
    meta.thin = j.at("thin").get<std::int64_t>();
    meta.seed = j.at("seed").get<std::uint64_t>();
    return meta;
  } catch (const nlohmann::json::exception& e) {
    throw format_error(path + ": bad bank metadata: " + e.what());
  }
}

}  // namespace

void save_bank(const SampleBank& bank, const std::filesystem::path& path) {
  bank.check();
  std::string out;
  out.reserve(64 + bank.draws.size() * 8);
  out.append(kMagic, sizeof kMagic);
  put_u32(out, kVersion);
  put_u64(out, static_cast<std::uint64_t>(bank.group_id));
  put_u64(out, bank.columns.size());
  put_u64(out, static_cast<std::uint64_t>(bank.rows));
  for (const auto& name : bank.columns) {
    put_u32(out, static_cast<std::uint32_t>(name.size()));
    out += name;
  }
  const std::string meta = bank_meta_to_json(bank.meta).dump();
  put_u64(out, meta.size());
  out += meta;
  for (double v : bank.draws) put_f64(out, v);
  atomic_write_file(path, out);
}

SampleBank load_bank(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw input_error("cannot open bank file " + path.string());
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  Reader r(bytes, path.string());

  char magic[8];
  r.read_bytes(magic, sizeof magic, "magic");
  if (std::memcmp(magic, kMagic, sizeof kMagic) != 0) {
    throw format_error(path.string() + ": bad magic at offset 0 (not a bank file)");
  }
  const std::uint32_t version = r.read_u32("version");
  if (version != kVersion) {
    throw format_error(path.string() + ": unsupported bank format version " +
                       std::to_string(version) + " (expected " + std::to_string(kVersion) +
                       ") at offset 8");
  }

  SampleBank bank;
  bank.group_id = static_cast<std::int64_t>(r.read_u64("group_id"));
  const std::uint64_t ncols = r.read_u64("column count");
  bank.rows = static_cast<std::int64_t>(r.read_u64("row count"));
  if (ncols < 2 || ncols > 1u << 20) {
    throw format_error(path.string() + ": implausible column count " + std::to_string(ncols) +
                       " at offset 28");
  }
  for (std::uint64_t c = 0; c < ncols; ++c) {
    const std::uint32_t len = r.read_u32("column name length");
    if (len > 4096) {
      throw format_error(path.string() + ": implausible column name length at offset " +
                         std::to_string(r.offset() - 4));
    }
    bank.columns.push_back(r.read_string(len, "column name"));
  }
  const std::uint64_t meta_len = r.read_u64("metadata length");
  const std::size_t meta_offset = r.offset();
  const std::string meta_bytes = r.read_string(meta_len, "metadata JSON");
  nlohmann::json meta_json;
  try {
    meta_json = nlohmann::json::parse(meta_bytes);
  } catch (const nlohmann::json::exception& e) {
    throw format_error(path.string() + ": unparsable metadata JSON at offset " +
                       std::to_string(meta_offset) + ": " + e.what());
  }
  bank.meta = bank_meta_from_json(meta_json, path.string());

  const std::uint64_t n_values = ncols * static_cast<std::uint64_t>(bank.rows);
  bank.draws.resize(n_values);
  for (std::uint64_t i = 0; i < n_values; ++i) {
    const std::size_t value_offset = r.offset();
    bank.draws[i] = r.read_f64("payload");
    if (!std::isfinite(bank.draws[i])) {
      throw format_error(path.string() + ": non-finite payload value at offset " +
                         std::to_string(value_offset));
    }
  }
  if (r.offset() != bytes.size()) {
    throw format_error(path.string() + ": " + std::to_string(bytes.size() - r.offset()) +
                       " trailing bytes after payload at offset " + std::to_string(r.offset()));
  }
  bank.check();
  return bank;
}

}  // namespace h2s
