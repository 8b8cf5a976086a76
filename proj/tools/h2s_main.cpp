// h2s: two-stage parallel MCMC for nested hierarchical Normal models.
//
// Pipeline: simulate (or ingest) -> full | stage1 -> stage2 -> compare.
// Exit codes: 0 success, 2 usage, 3 input/format, 4 numerical failure.

#include <algorithm>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "h2s/chain_store.hpp"
#include "h2s/full_sampler.hpp"
#include "h2s/io.hpp"
#include "h2s/log.hpp"
#include "h2s/metrics.hpp"
#include "h2s/model.hpp"
#include "h2s/simulate.hpp"
#include "h2s/stage1.hpp"
#include "h2s/stage2.hpp"
#include "h2s/version.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// --- shared option blocks ---------------------------------------------------

struct PriorFlags {
  int split_level = 0;  // 0 means the supported default (depth - 1)
  double mu_prior_mean = 0.0;
  double mu_prior_var = 1e6;
  double tau2_prior_shape = 0.1;
  double tau2_prior_rate = 0.1;
  double sigma2_prior_shape = 0.01;
  double sigma2_prior_rate = 0.01;
  double eta2_prior_shape = 0.1;
  double eta2_prior_rate = 0.1;
  double stage1_prior_mean = 0.0;
  double stage1_prior_var = 1e6;

  void attach(CLI::App* cmd) {
    cmd->add_option("--split-level", split_level,
                    "Stage-1 split level c_s (only depth-1 is supported; other values "
                    "are rejected)");
    cmd->add_option("--mu-prior-mean", mu_prior_mean, "Normal prior mean for mu");
    cmd->add_option("--mu-prior-var", mu_prior_var, "Normal prior variance for mu");
    cmd->add_option("--tau2-prior-shape", tau2_prior_shape, "InvGamma shape for tau2");
    cmd->add_option("--tau2-prior-rate", tau2_prior_rate, "InvGamma rate for tau2");
    cmd->add_option("--sigma2-prior-shape", sigma2_prior_shape, "InvGamma shape for sigma2_i");
    cmd->add_option("--sigma2-prior-rate", sigma2_prior_rate, "InvGamma rate for sigma2_i");
    cmd->add_option("--eta2-prior-shape", eta2_prior_shape, "InvGamma shape for eta2_ij (depth 4)");
    cmd->add_option("--eta2-prior-rate", eta2_prior_rate, "InvGamma rate for eta2_ij (depth 4)");
    cmd->add_option("--stage1-prior-mean", stage1_prior_mean,
                    "Stage-1 independent Normal prior mean for theta_i");
    cmd->add_option("--stage1-prior-var", stage1_prior_var,
                    "Stage-1 independent Normal prior variance for theta_i");
  }

  h2s::ModelSpec spec(int depth) const {
    h2s::ModelSpec spec;
    spec.depth = depth;
    spec.split_level = split_level > 0 ? split_level : depth - 1;
    spec.hyper_mu = {mu_prior_mean, mu_prior_var};
    spec.hyper_tau2 = {tau2_prior_shape, tau2_prior_rate};
    spec.prior_sigma2 = {sigma2_prior_shape, sigma2_prior_rate};
    spec.prior_eta2 = {eta2_prior_shape, eta2_prior_rate};
    spec.stage1_theta_prior = {stage1_prior_mean, stage1_prior_var};
    h2s::validate(spec);
    return spec;
  }

  void describe(std::map<std::string, std::string>& kv) const {
    kv["split_level"] = std::to_string(split_level);
    kv["mu_prior_mean"] = h2s::format_double(mu_prior_mean);
    kv["mu_prior_var"] = h2s::format_double(mu_prior_var);
    kv["tau2_prior_shape"] = h2s::format_double(tau2_prior_shape);
    kv["tau2_prior_rate"] = h2s::format_double(tau2_prior_rate);
    kv["sigma2_prior_shape"] = h2s::format_double(sigma2_prior_shape);
    kv["sigma2_prior_rate"] = h2s::format_double(sigma2_prior_rate);
    kv["eta2_prior_shape"] = h2s::format_double(eta2_prior_shape);
    kv["eta2_prior_rate"] = h2s::format_double(eta2_prior_rate);
    kv["stage1_prior_mean"] = h2s::format_double(stage1_prior_mean);
    kv["stage1_prior_var"] = h2s::format_double(stage1_prior_var);
  }
};

std::string hash_of(const std::map<std::string, std::string>& kv) {
  std::string canonical;
  for (const auto& [k, v] : kv) {
    canonical += k;
    canonical += '=';
    canonical += v;
    canonical += '\n';
  }
  return h2s::fnv1a_hex(canonical);
}

json provenance(std::uint64_t seed, const std::string& config_hash) {
  return json{{"seed", seed}, {"config_hash", config_hash}, {"tool_version", h2s::version_string()}};
}

// --- simulate ----------------------------------------------------------------

struct SimulateCmd {
  h2s::SimConfig cfg;
  std::vector<std::int64_t> per_group_counts;
  std::string out_data = "dataset.csv";
  std::string out_truth = "truth.json";

  void run() const {
    h2s::SimConfig local = cfg;
    local.per_group_counts = per_group_counts;
    const h2s::SimResult result = h2s::simulate(local);

    std::map<std::string, std::string> kv;
    kv["depth"] = std::to_string(local.depth);
    kv["groups"] = std::to_string(local.n_groups);
    kv["per_group"] = std::to_string(local.per_group);
    kv["cells"] = std::to_string(local.cells_per_group);
    kv["per_cell"] = std::to_string(local.per_cell);
    kv["mu"] = h2s::format_double(local.true_mu);
    kv["tau2"] = h2s::format_double(local.true_tau2);
    kv["sigma2_mean"] = h2s::format_double(local.sigma2_mean);
    kv["sigma2_var"] = h2s::format_double(local.sigma2_var);
    kv["seed"] = std::to_string(local.seed);
    const std::string config_hash = hash_of(kv);

    h2s::write_dataset_csv(result.dataset, out_data);

    json truth;
    truth["mu"] = result.truth.mu;
    truth["tau2"] = result.truth.tau2;
    truth["theta"] = result.truth.theta;
    truth["sigma2"] = result.truth.sigma2;
    if (local.depth == 4) {
      truth["delta"] = result.truth.delta;
      truth["eta2"] = result.truth.eta2;
    }
    truth["config"] = kv;
    truth["metadata"] = provenance(local.seed, config_hash);
    h2s::atomic_write_file(out_truth, truth.dump(2) + "\n");
    std::printf("wrote %s and %s (%zu groups)\n", out_data.c_str(), out_truth.c_str(),
                result.dataset.size());
  }
};

// --- ingest -------------------------------------------------------------------

struct IngestCmd {
  std::string in_path;
  std::string out_path = "dataset.csv";
  std::string summary_path;

  void run() const {
    const auto dataset = h2s::read_dataset_csv(in_path);
    h2s::write_dataset_csv(dataset, out_path);
    if (!summary_path.empty()) {
      json summary;
      summary["depth"] = dataset.front().depth();
      summary["groups"] = dataset.size();
      json per_group = json::array();
      for (const auto& group : dataset) {
        json g{{"group_id", group.group_id}};
        if (group.depth() == 3) {
          g["count"] = group.values.size();
        } else {
          g["cells"] = group.cells.size();
          std::size_t count = 0;
          for (const auto& [cid, values] : group.cells) count += values.size();
          g["count"] = count;
        }
        per_group.push_back(g);
      }
      summary["per_group"] = per_group;
      summary["source"] = in_path;
      h2s::atomic_write_file(summary_path, summary.dump(2) + "\n");
    }
    std::printf("ingested %s -> %s (%zu groups)\n", in_path.c_str(), out_path.c_str(),
                dataset.size());
  }
};

// --- full ----------------------------------------------------------------------

struct FullCmd {
  std::string data_path;
  std::string out_dir = "chains_full";
  h2s::SamplerOptions opts;
  PriorFlags priors;

  void run() const {
    const auto dataset = h2s::read_dataset_csv(data_path);
    const h2s::ModelSpec spec = priors.spec(dataset.front().depth());

    std::map<std::string, std::string> kv;
    priors.describe(kv);
    kv["iters"] = std::to_string(opts.total_iters);
    kv["burn_in"] = std::to_string(opts.effective_burn_in());
    kv["thin"] = std::to_string(opts.thin);
    kv["seed"] = std::to_string(opts.seed);
    kv["data"] = data_path;

    h2s::ChainStore chains = h2s::run_full_gibbs(dataset, spec, opts);
    chains.meta.config_hash = hash_of(kv);
    h2s::save_chains(chains, out_dir);
    std::printf("full-data Gibbs: %lld retained draws in %.2fs -> %s\n",
                static_cast<long long>(chains.meta.retained()), chains.meta.wall_seconds,
                out_dir.c_str());
  }
};

// --- stage1 ---------------------------------------------------------------------

struct Stage1Cmd {
  std::string data_path;
  std::string out_dir = "banks";
  std::int64_t draws = 10000;
  std::vector<std::int64_t> draws_list;
  std::int64_t burn_in = -1;
  std::int64_t thin = 1;
  std::uint64_t seed = 0;
  int workers = 1;
  PriorFlags priors;

  int run() const {
    const auto dataset = h2s::read_dataset_csv(data_path);
    const h2s::ModelSpec spec = priors.spec(dataset.front().depth());

    std::vector<std::int64_t> per_group = draws_list;
    if (per_group.empty()) {
      per_group.assign(dataset.size(), draws);
    }

    std::map<std::string, std::string> kv;
    priors.describe(kv);
    kv["draws"] = std::to_string(draws);
    kv["burn_in"] = std::to_string(burn_in);
    kv["thin"] = std::to_string(thin);
    kv["seed"] = std::to_string(seed);
    kv["workers"] = std::to_string(workers);
    kv["data"] = data_path;
    const std::string config_hash = hash_of(kv);

    const h2s::Stage1Output out =
        h2s::run_stage1_all(dataset, spec, per_group, burn_in, thin, seed, workers);

    fs::create_directories(out_dir);
    json summary;
    summary["avg_subset_seconds"] = out.avg_subset_seconds;
    summary["metadata"] = provenance(seed, config_hash);
    json groups = json::array();
    for (std::size_t i = 0; i < out.banks.size(); ++i) {
      const auto& bank = out.banks[i];
      const std::string file = "group_" + std::to_string(bank.group_id) + ".bank";
      h2s::save_bank(bank, fs::path(out_dir) / file);
      groups.push_back(json{{"group_id", bank.group_id},
                            {"file", file},
                            {"rows", bank.rows},
                            {"seconds", out.per_group_seconds[i]}});
    }
    summary["groups"] = groups;
    json failures = json::array();
    for (const auto& failure : out.failures) {
      failures.push_back(json{{"group_id", failure.group_id}, {"message", failure.message}});
    }
    summary["failures"] = failures;
    h2s::atomic_write_file(fs::path(out_dir) / "stage1_summary.json", summary.dump(2) + "\n");

    std::printf("stage 1: %zu banks -> %s (avg %.2fs per subset)\n", out.banks.size(),
                out_dir.c_str(), out.avg_subset_seconds);
    if (!out.failures.empty()) {
      for (const auto& failure : out.failures) {
        std::fprintf(stderr, "h2s: stage1 group %lld failed: %s\n",
                     static_cast<long long>(failure.group_id), failure.message.c_str());
      }
      return 3;
    }
    return 0;
  }
};

// --- stage2 ----------------------------------------------------------------------

std::vector<h2s::SampleBank> load_banks_dir(const std::string& dir) {
  std::vector<fs::path> paths;
  if (!fs::is_directory(dir)) throw h2s::input_error("not a bank directory: " + dir);
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.path().extension() == ".bank") paths.push_back(entry.path());
  }
  if (paths.empty()) throw h2s::input_error("no .bank files in " + dir);
  std::vector<h2s::SampleBank> banks;
  banks.reserve(paths.size());
  for (const auto& path : paths) banks.push_back(h2s::load_bank(path));
  std::sort(banks.begin(), banks.end(),
            [](const auto& a, const auto& b) { return a.group_id < b.group_id; });
  return banks;
}

struct Stage2Cmd {
  std::string banks_dir;
  std::string out_dir = "chains_stage2";
  h2s::Stage2Options opts;
  std::string mode = "exact";
  PriorFlags priors;

  void run() {
    const auto banks = load_banks_dir(banks_dir);
    const h2s::ModelSpec spec = priors.spec(banks.front().meta.depth);
    if (mode == "exact") {
      opts.mode = h2s::RatioMode::exact;
    } else if (mode == "uniform") {
      opts.mode = h2s::RatioMode::uniform;
    } else {
      throw h2s::input_error("--mode must be 'exact' or 'uniform'");
    }

    std::map<std::string, std::string> kv;
    priors.describe(kv);
    kv["iters"] = std::to_string(opts.total_iters);
    kv["burn_in"] = std::to_string(opts.effective_burn_in());
    kv["thin"] = std::to_string(opts.thin);
    kv["seed"] = std::to_string(opts.seed);
    kv["mode"] = mode;
    kv["banks"] = banks_dir;
    const std::string config_hash = hash_of(kv);

    h2s::Stage2Result result = h2s::run_stage2(banks, spec, opts);
    result.chains.meta.config_hash = config_hash;
    result.chains.meta.stage1_avg_subset_seconds = stage1_avg_seconds();
    h2s::save_chains(result.chains, out_dir);

    json stats;
    json groups = json::array();
    json low = json::array();
    for (const auto& gs : result.mh.groups) {
      groups.push_back(json{{"group_id", gs.group_id},
                            {"proposals", gs.proposals},
                            {"accepts", gs.accepts},
                            {"acceptance_rate", gs.acceptance_rate()}});
      if (gs.acceptance_rate() < 0.01) low.push_back(gs.group_id);
    }
    stats["groups"] = groups;
    stats["low_acceptance_groups"] = low;
    stats["metadata"] = provenance(opts.seed, config_hash);
    h2s::atomic_write_file(fs::path(out_dir) / "mh_stats.json", stats.dump(2) + "\n");

    std::printf("stage 2: %lld retained draws in %.2fs -> %s\n",
                static_cast<long long>(result.chains.meta.retained()),
                result.chains.meta.wall_seconds, out_dir.c_str());
  }

  // Bank files are bit-exact and carry no timing; the per-subset average
  // comes from the stage-1 summary written next to them, when present.
  double stage1_avg_seconds() const {
    const fs::path summary_path = fs::path(banks_dir) / "stage1_summary.json";
    std::ifstream in(summary_path);
    if (!in) return -1.0;
    try {
      json summary;
      in >> summary;
      return summary.value("avg_subset_seconds", -1.0);
    } catch (const json::exception&) {
      return -1.0;
    }
  }
};

// --- compare -----------------------------------------------------------------------

struct CompareCmd {
  std::string ref_dir;
  std::string alt_dir;
  std::string out_path = "report.json";
  std::string densities_dir;
  std::size_t grid_size = 512;

  void run() const {
    const h2s::ChainStore ref = h2s::load_chains(ref_dir);
    const h2s::ChainStore alt = h2s::load_chains(alt_dir);

    json report;
    json families = json::object();
    json per_column = json::object();
    json diagnostics = json::object();
    json diag_ref = json::object();
    json diag_alt = json::object();

    for (const auto& ref_family : ref.families) {
      const h2s::ParamFamily* alt_family = alt.find(ref_family.name);
      if (alt_family == nullptr) {
        throw h2s::input_error("compare: family '" + ref_family.name + "' missing from " +
                               alt_dir);
      }
      if (alt_family->labels != ref_family.labels) {
        throw h2s::input_error("compare: family '" + ref_family.name +
                               "' has mismatched column layout between runs");
      }
      double d1_sum = 0.0;
      double d2_sum = 0.0;
      json columns = json::array();
      for (std::size_t c = 0; c < ref_family.labels.size(); ++c) {
        const auto p = h2s::kde(ref_family.chains[c], grid_size);
        const auto q = h2s::kde(alt_family->chains[c], grid_size);
        const double d1 = h2s::relative_l1(p, q);
        const double d2 = h2s::relative_l2(p, q);
        d1_sum += d1;
        d2_sum += d2;
        columns.push_back(
            json{{"label", ref_family.labels[c]}, {"d1", d1}, {"d2", d2}});
        diag_ref[ref_family.labels[c]] =
            json{{"rhat", h2s::split_rhat(ref_family.chains[c])},
                 {"ess", h2s::effective_sample_size(ref_family.chains[c])}};
        diag_alt[ref_family.labels[c]] =
            json{{"rhat", h2s::split_rhat(alt_family->chains[c])},
                 {"ess", h2s::effective_sample_size(alt_family->chains[c])}};
        if (!densities_dir.empty()) {
          std::string csv = "grid,p,q\n";
          const double lo = std::min(p.grid.front(), q.grid.front());
          const double hi = std::max(p.grid.back(), q.grid.back());
          for (std::size_t i = 0; i < grid_size; ++i) {
            const double x = lo + (hi - lo) * static_cast<double>(i) /
                                      static_cast<double>(grid_size - 1);
            csv += h2s::format_double(x);
            csv += ',';
            csv += h2s::format_double(density_at(p, x));
            csv += ',';
            csv += h2s::format_double(density_at(q, x));
            csv += '\n';
          }
          h2s::atomic_write_file(fs::path(densities_dir) / (ref_family.labels[c] + ".csv"),
                                 csv);
        }
      }
      const auto count = static_cast<double>(ref_family.labels.size());
      families[ref_family.name] = json{{"d1", d1_sum / count}, {"d2", d2_sum / count}};
      per_column[ref_family.name] = columns;
    }
    diagnostics["ref"] = diag_ref;
    diagnostics["alt"] = diag_alt;

    report["families"] = families;
    report["per_column"] = per_column;
    report["diagnostics"] = diagnostics;
    report["grid_size"] = grid_size;
    report["ref"] = json{{"dir", ref_dir}, {"sampler", ref.meta.sampler}};
    report["alt"] = json{{"dir", alt_dir}, {"sampler", alt.meta.sampler}};
    report["tool_version"] = h2s::version_string();

    // Timing table, filled when one side is a full run and the other a
    // stage-2 run that knows its stage-1 per-subset average.
    const h2s::ChainMeta* full_meta = nullptr;
    const h2s::ChainMeta* stage2_meta = nullptr;
    if (ref.meta.sampler == "full-gibbs") full_meta = &ref.meta;
    if (alt.meta.sampler == "full-gibbs") full_meta = &alt.meta;
    if (ref.meta.sampler == "stage2-mh-within-gibbs") stage2_meta = &ref.meta;
    if (alt.meta.sampler == "stage2-mh-within-gibbs") stage2_meta = &alt.meta;
    if (full_meta != nullptr && stage2_meta != nullptr &&
        stage2_meta->stage1_avg_subset_seconds >= 0.0) {
      const double stage1_avg = stage2_meta->stage1_avg_subset_seconds;
      const double stage2_s = stage2_meta->wall_seconds;
      const double two_stage_total = stage1_avg + stage2_s;
      const double full_total = full_meta->wall_seconds;
      json timing;
      timing["stage1_avg_subset_seconds"] = stage1_avg;
      timing["stage2_seconds"] = stage2_s;
      timing["two_stage_total_seconds"] = two_stage_total;
      timing["full_total_seconds"] = full_total;
      timing["percent_reduction"] = 1.0 - two_stage_total / full_total;
      report["timing"] = timing;
    }

    h2s::atomic_write_file(out_path, report.dump(2) + "\n");
    std::printf("comparison report -> %s\n", out_path.c_str());
    for (const auto& [name, d] : families.items()) {
      std::printf("  %-8s d1=%.4f d2=%.4f\n", name.c_str(), d["d1"].get<double>(),
                  d["d2"].get<double>());
    }
  }

  static double density_at(const h2s::DensityEstimate& d, double x) {
    if (x <= d.grid.front() || x >= d.grid.back()) {
      return x == d.grid.front() ? d.values.front()
                                 : (x == d.grid.back() ? d.values.back() : 0.0);
    }
    const auto it = std::upper_bound(d.grid.begin(), d.grid.end(), x);
    const std::size_t hi = static_cast<std::size_t>(it - d.grid.begin());
    const double t = (x - d.grid[hi - 1]) / (d.grid[hi] - d.grid[hi - 1]);
    return d.values[hi - 1] + t * (d.values[hi] - d.values[hi - 1]);
  }
};

// --- bank-export ----------------------------------------------------------------------

struct BankExportCmd {
  std::string bank_path;
  std::string out_path = "bank.csv";

  void run() const {
    const h2s::SampleBank bank = h2s::load_bank(bank_path);
    std::string csv;
    for (std::size_t c = 0; c < bank.columns.size(); ++c) {
      if (c) csv += ',';
      csv += bank.columns[c];
    }
    csv += '\n';
    for (std::int64_t r = 0; r < bank.rows; ++r) {
      for (std::size_t c = 0; c < bank.columns.size(); ++c) {
        if (c) csv += ',';
        csv += h2s::format_double(bank.at(r, c));
      }
      csv += '\n';
    }
    h2s::atomic_write_file(out_path, csv);
    std::printf("exported %lld rows x %zu columns -> %s\n", static_cast<long long>(bank.rows),
                bank.columns.size(), out_path.c_str());
  }
};

void add_seed_option(CLI::App* cmd, std::uint64_t& seed) {
  cmd->add_option("--seed", seed, "Master seed (env H2S_SEED overrides config-file values)")
      ->envname("H2S_SEED");
}

std::string g_config_path;

void add_config_option(CLI::App* cmd) {
  cmd->add_option("--config", g_config_path,
                  "Flat key=value file mirroring this subcommand's flags "
                  "(explicit flags override; H2S_SEED overrides a config seed)");
}

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return "";
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

// Expands --config <file> into long flags. Precedence: explicit flags, then
// H2S_SEED (for the seed key), then file values, then built-in defaults.
std::vector<std::string> inject_config(std::vector<std::string> args) {
  if (args.empty() || args[0].empty() || args[0][0] == '-') return args;
  std::string path;
  for (std::size_t i = 1; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) {
      path = args[i + 1];
      break;
    }
    if (args[i].rfind("--config=", 0) == 0) {
      path = args[i].substr(9);
      break;
    }
  }
  if (path.empty()) return args;

  std::ifstream in(path);
  if (!in) throw h2s::input_error("cannot open config file " + path);

  auto has_flag = [&](const std::string& flag) {
    for (std::size_t i = 1; i < args.size(); ++i) {
      if (args[i] == flag || args[i].rfind(flag + "=", 0) == 0) return true;
    }
    return false;
  };

  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos || trim(line.substr(0, eq)).empty()) {
      throw h2s::format_error(path + ":" + std::to_string(line_no) + ": expected key=value");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    const std::string flag = "--" + key;
    if (has_flag(flag)) continue;
    if (key == "seed" && std::getenv("H2S_SEED") != nullptr) continue;
    args.push_back(flag + "=" + value);
  }
  return args;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Two-stage parallel MCMC for Bayesian nested hierarchical models"};
  app.require_subcommand(1);
  app.set_version_flag("--version", h2s::version_string());

  SimulateCmd simulate_cmd;
  IngestCmd ingest_cmd;
  FullCmd full_cmd;
  Stage1Cmd stage1_cmd;
  Stage2Cmd stage2_cmd;
  CompareCmd compare_cmd;
  BankExportCmd export_cmd;
  int exit_code = 0;

  {
    auto* cmd = app.add_subcommand("simulate", "Generate a synthetic dataset and its truth record");
    add_config_option(cmd);
    cmd->add_option("--depth", simulate_cmd.cfg.depth, "Model depth (3 or 4)");
    cmd->add_option("--groups", simulate_cmd.cfg.n_groups, "Number of groups n");
    cmd->add_option("--per-group", simulate_cmd.cfg.per_group, "Observations per group m_i");
    cmd->add_option("--per-group-counts", simulate_cmd.per_group_counts,
                    "Per-group observation counts (overrides --per-group)");
    cmd->add_option("--cells", simulate_cmd.cfg.cells_per_group, "Cells per group (depth 4)");
    cmd->add_option("--per-cell", simulate_cmd.cfg.per_cell, "Observations per cell (depth 4)");
    cmd->add_option("--mu", simulate_cmd.cfg.true_mu, "Generating mu");
    cmd->add_option("--tau2", simulate_cmd.cfg.true_tau2, "Generating tau2");
    cmd->add_option("--sigma2-mean", simulate_cmd.cfg.sigma2_mean, "Mean of the sigma2 draw");
    cmd->add_option("--sigma2-var", simulate_cmd.cfg.sigma2_var, "Variance of the sigma2 draw");
    add_seed_option(cmd, simulate_cmd.cfg.seed);
    cmd->add_option("--out-data", simulate_cmd.out_data, "Output dataset CSV");
    cmd->add_option("--out-truth", simulate_cmd.out_truth, "Output truth JSON");
    cmd->callback([&] { simulate_cmd.run(); });
  }
  {
    auto* cmd = app.add_subcommand("ingest", "Validate and canonicalize a dataset CSV");
    add_config_option(cmd);
    cmd->add_option("--in", ingest_cmd.in_path, "Input CSV (group_id,value or group_id,cell_id,value)")
        ->required();
    cmd->add_option("--out", ingest_cmd.out_path, "Canonical dataset CSV");
    cmd->add_option("--summary", ingest_cmd.summary_path, "Optional summary JSON");
    cmd->callback([&] { ingest_cmd.run(); });
  }
  {
    auto* cmd = app.add_subcommand("full", "Full-data reference Gibbs sampler");
    add_config_option(cmd);
    cmd->add_option("--data", full_cmd.data_path, "Dataset CSV")->required();
    cmd->add_option("--iters", full_cmd.opts.total_iters, "Total iterations T");
    cmd->add_option("--burn-in", full_cmd.opts.burn_in, "Burn-in (default 10% of T)");
    cmd->add_option("--thin", full_cmd.opts.thin, "Thinning interval");
    add_seed_option(cmd, full_cmd.opts.seed);
    cmd->add_option("--out", full_cmd.out_dir, "Output chain directory");
    full_cmd.priors.attach(cmd);
    cmd->callback([&] { full_cmd.run(); });
  }
  {
    auto* cmd = app.add_subcommand("stage1", "Detached per-group samplers (parallel)");
    add_config_option(cmd);
    cmd->add_option("--data", stage1_cmd.data_path, "Dataset CSV")->required();
    cmd->add_option("--draws", stage1_cmd.draws, "Retained draws A_i per group");
    cmd->add_option("--draws-list", stage1_cmd.draws_list,
                    "Per-group retained draw counts (overrides --draws)");
    cmd->add_option("--burn-in", stage1_cmd.burn_in, "Burn-in (default 10% of draws)");
    cmd->add_option("--thin", stage1_cmd.thin, "Thinning interval");
    add_seed_option(cmd, stage1_cmd.seed);
    cmd->add_option("--workers", stage1_cmd.workers, "Parallel worker count");
    cmd->add_option("--out-dir", stage1_cmd.out_dir, "Output bank directory");
    stage1_cmd.priors.attach(cmd);
    cmd->callback([&] { exit_code = stage1_cmd.run(); });
  }
  {
    auto* cmd = app.add_subcommand("stage2", "Data-free MH-within-Gibbs over the banks");
    add_config_option(cmd);
    cmd->add_option("--banks", stage2_cmd.banks_dir, "Bank directory from stage 1")->required();
    cmd->add_option("--iters", stage2_cmd.opts.total_iters, "Total iterations T");
    cmd->add_option("--burn-in", stage2_cmd.opts.burn_in, "Burn-in (default 10% of T)");
    cmd->add_option("--thin", stage2_cmd.opts.thin, "Thinning interval");
    add_seed_option(cmd, stage2_cmd.opts.seed);
    cmd->add_option("--mode", stage2_cmd.mode,
                    "Acceptance ratio mode: exact (keep stage-1 prior terms) or uniform");
    cmd->add_option("--out", stage2_cmd.out_dir, "Output chain directory");
    stage2_cmd.priors.attach(cmd);
    cmd->callback([&] { stage2_cmd.run(); });
  }
  {
    auto* cmd = app.add_subcommand("compare", "Distances and diagnostics between two chain runs");
    add_config_option(cmd);
    cmd->add_option("--ref", compare_cmd.ref_dir, "Reference chain directory")->required();
    cmd->add_option("--alt", compare_cmd.alt_dir, "Alternative chain directory")->required();
    cmd->add_option("--out", compare_cmd.out_path, "Report JSON path");
    cmd->add_option("--densities-dir", compare_cmd.densities_dir,
                    "Optional directory for per-parameter density curve CSVs");
    cmd->add_option("--grid", compare_cmd.grid_size, "KDE grid size");
    cmd->callback([&] { compare_cmd.run(); });
  }
  {
    auto* cmd = app.add_subcommand("bank-export", "Dump a binary bank as CSV for inspection");
    cmd->add_option("--bank", export_cmd.bank_path, "Bank file")->required();
    cmd->add_option("--out", export_cmd.out_path, "Output CSV");
    cmd->callback([&] { export_cmd.run(); });
  }

  try {
    std::vector<std::string> args(argv + 1, argv + argc);
    args = inject_config(std::move(args));
    std::reverse(args.begin(), args.end());
    app.parse(std::move(args));
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  } catch (const h2s::input_error& e) {
    std::fprintf(stderr, "h2s: %s\n", e.what());
    return 3;
  } catch (const h2s::format_error& e) {
    std::fprintf(stderr, "h2s: %s\n", e.what());
    return 3;
  } catch (const fs::filesystem_error& e) {
    std::fprintf(stderr, "h2s: %s\n", e.what());
    return 3;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "h2s: %s\n", e.what());
    return 4;
  }
  return exit_code;
}
