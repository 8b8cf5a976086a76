#include "h2s/full_sampler.hpp"

#include <chrono>
#include <cmath>
#include <string>

#include "h2s/densities.hpp"
#include "h2s/version.hpp"

namespace h2s {

double draw_mu(const std::vector<double>& thetas, double tau2, const NormalPrior& prior,
               Rng& rng) {
  if (thetas.empty()) throw input_error("draw_mu: no thetas");
  if (!(tau2 > 0.0) || !std::isfinite(tau2)) {
    throw domain_error("draw_mu: tau2 must be positive and finite");
  }
  const double n = static_cast<double>(thetas.size());
  double sum = 0.0;
  for (double t : thetas) sum += t;
  const double precision = n / tau2 + 1.0 / prior.variance;
  const double variance = 1.0 / precision;
  const double mean = variance * (sum / tau2 + prior.mean / prior.variance);
  return draw_normal(rng, mean, variance);
}

double draw_tau2(const std::vector<double>& thetas, double mu, const InvGammaPrior& prior,
                 Rng& rng) {
  if (thetas.empty()) throw input_error("draw_tau2: no thetas");
  double sse = 0.0;
  for (double t : thetas) {
    const double r = t - mu;
    sse += r * r;
  }
  const double shape = prior.shape + 0.5 * static_cast<double>(thetas.size());
  const double rate = prior.rate + 0.5 * sse;
  return draw_inv_gamma(rng, shape, rate);
}

double draw_theta(const Moments& stats, double sigma2, double mu, double tau2, Rng& rng) {
  if (stats.count < 1) throw input_error("draw_theta: empty stats");
  if (!(sigma2 > 0.0) || !(tau2 > 0.0)) {
    throw domain_error("draw_theta: sigma2 and tau2 must be positive");
  }
  const double precision = static_cast<double>(stats.count) / sigma2 + 1.0 / tau2;
  const double variance = 1.0 / precision;
  const double mean = variance * (stats.sum / sigma2 + mu / tau2);
  return draw_normal(rng, mean, variance);
}

double draw_sigma2(const Moments& stats, double theta, const InvGammaPrior& prior, Rng& rng) {
  if (stats.count < 1) throw input_error("draw_sigma2: empty stats");
  const double shape = prior.shape + 0.5 * static_cast<double>(stats.count);
  // sse can round to a tiny negative on near-constant data; clamp at zero.
  const double rate = prior.rate + 0.5 * std::max(stats.sse(theta), 0.0);
  return draw_inv_gamma(rng, shape, rate);
}

namespace {

double floored_variance(const Moments& m) {
  const double denom = static_cast<double>(m.count > 1 ? m.count - 1 : 1);
  const double var = m.sse(m.mean()) / denom;
  return std::max(var, 1e-6);
}

Moments moments_of_values(const std::vector<double>& values) {
  Moments m;
  m.count = static_cast<std::int64_t>(values.size());
  for (double v : values) {
    m.sum += v;
    m.sum_sq += v * v;
  }
  return m;
}

void ensure_finite(double v, const char* what, std::int64_t iter, std::int64_t group_id) {
  if (!std::isfinite(v)) {
    throw numerical_error(std::string("full-gibbs: non-finite ") + what + " at iteration " +
                          std::to_string(iter) + ", group " + std::to_string(group_id));
  }
}

}  // namespace

ChainStore run_full_gibbs(const std::vector<GroupData>& dataset, const ModelSpec& spec,
                          const SamplerOptions& opts) {
  validate(spec);
  validate_dataset(dataset, spec);
  const std::int64_t burn_in = opts.effective_burn_in();
  if (opts.total_iters <= burn_in || burn_in < 0) {
    throw input_error("run_full_gibbs: need total_iters > burn_in >= 0");
  }
  if (opts.thin < 1) throw input_error("run_full_gibbs: thin must be >= 1");

  const auto t0 = std::chrono::steady_clock::now();
  const std::vector<GroupStats> stats = compute_stats(dataset);
  const std::size_t n = stats.size();

  // Deterministic data-moment initialization, recorded in metadata.
  ChainState st;
  st.theta.resize(n);
  st.sigma2.resize(n);
  if (spec.depth == 4) {
    st.delta.resize(n);
    st.eta2.resize(n);
  }
  for (std::size_t g = 0; g < n; ++g) {
    if (spec.depth == 3) {
      st.theta[g] = stats[g].pooled.mean();
      st.sigma2[g] = floored_variance(stats[g].pooled);
    } else {
      const std::size_t m = stats[g].cells.size();
      st.delta[g].resize(m);
      st.eta2[g].resize(m);
      for (std::size_t c = 0; c < m; ++c) {
        st.delta[g][c] = stats[g].cells[c].second.mean();
        st.eta2[g][c] = floored_variance(stats[g].cells[c].second);
      }
      const Moments dm = moments_of_values(st.delta[g]);
      st.theta[g] = dm.mean();
      st.sigma2[g] = floored_variance(dm);
    }
  }
  {
    const Moments tm = moments_of_values(st.theta);
    st.mu = tm.mean();
    st.tau2 = floored_variance(tm);
  }

  ChainStore store;
  store.meta.total_iters = opts.total_iters;
  store.meta.burn_in = burn_in;
  store.meta.thin = opts.thin;
  store.meta.seed = opts.seed;
  store.meta.depth = spec.depth;
  store.meta.sampler = "full-gibbs";
  store.meta.scan_order = spec.depth == 3
                              ? "mu, tau2, then per group: theta_i, sigma2_i (id order)"
                              : "mu, tau2, then per group: theta_i, sigma2_i, then per cell: "
                                "delta_ij, eta2_ij (id order)";
  store.meta.init = "data moments (group/cell means and variances)";
  store.meta.tool_version = version_string();

  std::vector<std::string> theta_labels(n), sigma2_labels(n);
  for (std::size_t g = 0; g < n; ++g) {
    const std::string gid = std::to_string(stats[g].group_id);
    theta_labels[g] = "theta_" + gid;
    sigma2_labels[g] = "sigma2_" + gid;
  }
  store.add_family("mu", {"mu"});
  store.add_family("tau2", {"tau2"});
  store.add_family("theta", theta_labels);
  store.add_family("sigma2", sigma2_labels);
  if (spec.depth == 4) {
    std::vector<std::string> delta_labels, eta2_labels;
    for (const auto& gs : stats) {
      for (const auto& [cid, m] : gs.cells) {
        const std::string tag = std::to_string(gs.group_id) + "_" + std::to_string(cid);
        delta_labels.push_back("delta_" + tag);
        eta2_labels.push_back("eta2_" + tag);
      }
    }
    store.add_family("delta", delta_labels);
    store.add_family("eta2", std::move(eta2_labels));
  }
  // References are stable from here on; no further add_family calls.
  auto& f_mu = store.families[0];
  auto& f_tau2 = store.families[1];
  auto& f_theta = store.families[2];
  auto& f_sigma2 = store.families[3];
  ParamFamily* f_delta = spec.depth == 4 ? &store.families[4] : nullptr;
  ParamFamily* f_eta2 = spec.depth == 4 ? &store.families[5] : nullptr;

  for (std::int64_t t = 1; t <= opts.total_iters; ++t) {
    const std::uint64_t iter_base =
        mix_seed(opts.seed, seed_domain::full_gibbs, static_cast<std::uint64_t>(t));
    Rng common(mix_seed(iter_base, 0));
    st.mu = draw_mu(st.theta, st.tau2, spec.hyper_mu, common);
    ensure_finite(st.mu, "mu", t, -1);
    st.tau2 = draw_tau2(st.theta, st.mu, spec.hyper_tau2, common);
    ensure_finite(st.tau2, "tau2", t, -1);

    for (std::size_t g = 0; g < n; ++g) {
      Rng grng(mix_seed(iter_base, static_cast<std::uint64_t>(g) + 1));
      const std::int64_t gid = stats[g].group_id;
      if (spec.depth == 3) {
        st.theta[g] = draw_theta(stats[g].pooled, st.sigma2[g], st.mu, st.tau2, grng);
        ensure_finite(st.theta[g], "theta", t, gid);
        st.sigma2[g] = draw_sigma2(stats[g].pooled, st.theta[g], spec.prior_sigma2, grng);
        ensure_finite(st.sigma2[g], "sigma2", t, gid);
      } else {
        const Moments dm = moments_of_values(st.delta[g]);
        st.theta[g] = draw_theta(dm, st.sigma2[g], st.mu, st.tau2, grng);
        ensure_finite(st.theta[g], "theta", t, gid);
        st.sigma2[g] = draw_sigma2(dm, st.theta[g], spec.prior_sigma2, grng);
        ensure_finite(st.sigma2[g], "sigma2", t, gid);
        for (std::size_t c = 0; c < stats[g].cells.size(); ++c) {
          const Moments& cm = stats[g].cells[c].second;
          st.delta[g][c] = draw_theta(cm, st.eta2[g][c], st.theta[g], st.sigma2[g], grng);
          ensure_finite(st.delta[g][c], "delta", t, gid);
          st.eta2[g][c] = draw_sigma2(cm, st.delta[g][c], spec.prior_eta2, grng);
          ensure_finite(st.eta2[g][c], "eta2", t, gid);
        }
      }
    }

    if (t > burn_in && (t - burn_in) % opts.thin == 0) {
      f_mu.chains[0].push_back(st.mu);
      f_tau2.chains[0].push_back(st.tau2);
      std::size_t flat = 0;
      for (std::size_t g = 0; g < n; ++g) {
        f_theta.chains[g].push_back(st.theta[g]);
        f_sigma2.chains[g].push_back(st.sigma2[g]);
        if (spec.depth == 4) {
          for (std::size_t c = 0; c < st.delta[g].size(); ++c, ++flat) {
            f_delta->chains[flat].push_back(st.delta[g][c]);
            f_eta2->chains[flat].push_back(st.eta2[g][c]);
          }
        }
      }
    }
  }

  store.meta.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  store.check();
  return store;
}

}  // namespace h2s
