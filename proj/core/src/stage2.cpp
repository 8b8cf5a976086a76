#include "h2s/stage2.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <set>
#include <string>

#include "h2s/densities.hpp"
#include "h2s/full_sampler.hpp"
#include "h2s/log.hpp"
#include "h2s/version.hpp"

namespace h2s {

double log_accept_ratio(double theta_cand, double theta_prev, double mu, double tau2,
                        const NormalPrior& stage1_prior, RatioMode mode) {
  double lr = log_normal_density(theta_cand, mu, tau2) - log_normal_density(theta_prev, mu, tau2);
  if (mode == RatioMode::exact) {
    lr += log_normal_density(theta_prev, stage1_prior) -
          log_normal_density(theta_cand, stage1_prior);
  }
  return lr;
}

bool mh_group_update(std::vector<double>& block, const SampleBank& bank, double mu, double tau2,
                     RatioMode mode, Rng& rng) {
  if (bank.rows < 1) throw input_error("mh_group_update: empty bank");
  if (block.size() != bank.columns.size()) {
    throw input_error("mh_group_update: block size does not match bank layout");
  }
  const std::int64_t row = static_cast<std::int64_t>(
      uniform_index(rng, static_cast<std::uint64_t>(bank.rows)));
  const double theta_cand = bank.at(row, 0);
  const double lr = log_accept_ratio(theta_cand, block[0], mu, tau2,
                                     bank.meta.stage1_theta_prior, mode);
  // One uniform is consumed whether or not lr already guarantees acceptance,
  // keeping the stream aligned across ratio modes and bank perturbations.
  const double u = uniform01_open(rng);
  if (std::log(u) <= lr) {
    for (std::size_t c = 0; c < block.size(); ++c) block[c] = bank.at(row, c);
    return true;
  }
  return false;
}

namespace {

void check_bank_layouts(const std::vector<SampleBank>& banks, const ModelSpec& spec) {
  std::set<std::int64_t> ids;
  for (const auto& bank : banks) {
    bank.check();
    if (!ids.insert(bank.group_id).second) {
      throw input_error("stage2: duplicate bank for group " + std::to_string(bank.group_id));
    }
    if (bank.meta.depth != spec.depth) {
      throw input_error("stage2: bank for group " + std::to_string(bank.group_id) +
                        " has depth " + std::to_string(bank.meta.depth) +
                        " but spec.depth is " + std::to_string(spec.depth));
    }
    if (bank.columns[0] != "theta" || bank.columns[1] != "sigma2") {
      throw input_error("stage2: bank for group " + std::to_string(bank.group_id) +
                        " must lead with theta, sigma2 columns");
    }
    if (spec.depth == 3 && bank.columns.size() != 2) {
      throw input_error("stage2: depth-3 bank for group " + std::to_string(bank.group_id) +
                        " has unexpected extra columns");
    }
    if (spec.depth == 4) {
      const std::size_t extra = bank.columns.size() - 2;
      if (extra == 0 || extra % 2 != 0) {
        throw input_error("stage2: depth-4 bank for group " + std::to_string(bank.group_id) +
                          " needs delta/eta2 column pairs");
      }
      const std::size_t m = extra / 2;
      for (std::size_t c = 0; c < m; ++c) {
        if (bank.columns[2 + c].rfind("delta_", 0) != 0 ||
            bank.columns[2 + m + c].rfind("eta2_", 0) != 0) {
          throw input_error("stage2: bank for group " + std::to_string(bank.group_id) +
                            " has unexpected column layout");
        }
      }
    }
  }
}

}  // namespace

Stage2Result run_stage2(const std::vector<SampleBank>& banks, const ModelSpec& spec,
                        const Stage2Options& opts) {
  validate(spec);
  if (banks.empty()) throw input_error("stage2: no banks");
  check_bank_layouts(banks, spec);
  const std::int64_t burn_in = opts.effective_burn_in();
  if (opts.total_iters <= burn_in || burn_in < 0) {
    throw input_error("stage2: need total_iters > burn_in >= 0");
  }
  if (opts.thin < 1) throw input_error("stage2: thin must be >= 1");

  const auto t0 = std::chrono::steady_clock::now();
  const std::size_t n = banks.size();

  // Initial blocks: one uniformly drawn row per bank, from per-group
  // substreams of the iteration-0 seed.
  const std::uint64_t init_base = mix_seed(opts.seed, seed_domain::stage2, 0);
  std::vector<std::vector<double>> blocks(n);
  for (std::size_t g = 0; g < n; ++g) {
    Rng grng(mix_seed(init_base, static_cast<std::uint64_t>(g) + 1));
    const auto row = static_cast<std::int64_t>(
        uniform_index(grng, static_cast<std::uint64_t>(banks[g].rows)));
    blocks[g].resize(banks[g].columns.size());
    for (std::size_t c = 0; c < blocks[g].size(); ++c) blocks[g][c] = banks[g].at(row, c);
  }

  std::vector<double> thetas(n);
  for (std::size_t g = 0; g < n; ++g) thetas[g] = blocks[g][0];
  double mu = 0.0;
  double tau2;
  {
    double mean = 0.0;
    for (double t : thetas) mean += t;
    mean /= static_cast<double>(n);
    double sse = 0.0;
    for (double t : thetas) sse += (t - mean) * (t - mean);
    tau2 = std::max(sse / static_cast<double>(n > 1 ? n - 1 : 1), 1e-6);
  }

  ChainStore store;
  store.meta.total_iters = opts.total_iters;
  store.meta.burn_in = burn_in;
  store.meta.thin = opts.thin;
  store.meta.seed = opts.seed;
  store.meta.depth = spec.depth;
  store.meta.sampler = "stage2-mh-within-gibbs";
  store.meta.scan_order = "mu, tau2, then one MH block proposal per group (id order)";
  store.meta.init = "uniform bank row per group; tau2 from initial theta variance; mu drawn first";
  store.meta.tool_version = version_string();

  std::vector<std::string> theta_labels(n), sigma2_labels(n);
  for (std::size_t g = 0; g < n; ++g) {
    const std::string gid = std::to_string(banks[g].group_id);
    theta_labels[g] = "theta_" + gid;
    sigma2_labels[g] = "sigma2_" + gid;
  }
  store.add_family("mu", {"mu"});
  store.add_family("tau2", {"tau2"});
  store.add_family("theta", theta_labels);
  store.add_family("sigma2", sigma2_labels);
  if (spec.depth == 4) {
    std::vector<std::string> delta_labels, eta2_labels;
    for (const auto& bank : banks) {
      const std::size_t m = (bank.columns.size() - 2) / 2;
      const std::string gid = std::to_string(bank.group_id);
      for (std::size_t c = 0; c < m; ++c) {
        // bank column "delta_<cid>" -> chain label "delta_<gid>_<cid>"
        delta_labels.push_back("delta_" + gid + bank.columns[2 + c].substr(5));
        eta2_labels.push_back("eta2_" + gid + bank.columns[2 + m + c].substr(4));
      }
    }
    store.add_family("delta", delta_labels);
    store.add_family("eta2", std::move(eta2_labels));
  }
  auto& f_mu = store.families[0];
  auto& f_tau2 = store.families[1];
  auto& f_theta = store.families[2];
  auto& f_sigma2 = store.families[3];
  ParamFamily* f_delta = spec.depth == 4 ? &store.families[4] : nullptr;
  ParamFamily* f_eta2 = spec.depth == 4 ? &store.families[5] : nullptr;

  MHStats mh;
  mh.groups.resize(n);
  for (std::size_t g = 0; g < n; ++g) mh.groups[g].group_id = banks[g].group_id;

  for (std::int64_t t = 1; t <= opts.total_iters; ++t) {
    const std::uint64_t iter_base =
        mix_seed(opts.seed, seed_domain::stage2, static_cast<std::uint64_t>(t));
    Rng common(mix_seed(iter_base, 0));
    mu = draw_mu(thetas, tau2, spec.hyper_mu, common);
    tau2 = draw_tau2(thetas, mu, spec.hyper_tau2, common);
    if (!std::isfinite(mu) || !std::isfinite(tau2)) {
      throw numerical_error("stage2: non-finite common draw at iteration " + std::to_string(t));
    }

    for (std::size_t g = 0; g < n; ++g) {
      Rng grng(mix_seed(iter_base, static_cast<std::uint64_t>(g) + 1));
      const bool accepted = mh_group_update(blocks[g], banks[g], mu, tau2, opts.mode, grng);
      mh.groups[g].proposals += 1;
      mh.groups[g].accepts += accepted ? 1 : 0;
      thetas[g] = blocks[g][0];
    }

    if (t > burn_in && (t - burn_in) % opts.thin == 0) {
      f_mu.chains[0].push_back(mu);
      f_tau2.chains[0].push_back(tau2);
      std::size_t flat = 0;
      for (std::size_t g = 0; g < n; ++g) {
        f_theta.chains[g].push_back(blocks[g][0]);
        f_sigma2.chains[g].push_back(blocks[g][1]);
        if (spec.depth == 4) {
          const std::size_t m = (blocks[g].size() - 2) / 2;
          for (std::size_t c = 0; c < m; ++c, ++flat) {
            f_delta->chains[flat].push_back(blocks[g][2 + c]);
            f_eta2->chains[flat].push_back(blocks[g][2 + m + c]);
          }
        }
      }
    }
  }

  store.meta.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  store.check();

  for (const auto& gs : mh.groups) {
    if (gs.acceptance_rate() < 0.01) {
      warn("stage2: group " + std::to_string(gs.group_id) + " acceptance rate " +
           std::to_string(gs.acceptance_rate()) +
           " is below 1%; its bank may cover the full-model conditional poorly");
    }
  }
  return {std::move(store), std::move(mh)};
}

}  // namespace h2s
