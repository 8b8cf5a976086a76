#include "h2s/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "h2s/log.hpp"

namespace h2s {

double trapezoid(const std::vector<double>& grid, const std::vector<double>& values) {
  if (grid.size() != values.size() || grid.size() < 2) {
    throw input_error("trapezoid: need matching grids of length >= 2");
  }
  double acc = 0.0;
  for (std::size_t i = 1; i < grid.size(); ++i) {
    acc += 0.5 * (grid[i] - grid[i - 1]) * (values[i] + values[i - 1]);
  }
  return acc;
}

namespace {

// Type-7 (linear interpolation) quantile of sorted data.
double quantile_sorted(const std::vector<double>& sorted, double p) {
  const double h = (static_cast<double>(sorted.size()) - 1.0) * p;
  const auto lo = static_cast<std::size_t>(h);
  if (lo + 1 >= sorted.size()) return sorted.back();
  const double frac = h - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

constexpr double kInvSqrt2Pi = 0.39894228040143267793994605993438;

}  // namespace

DensityEstimate kde(const std::vector<double>& samples, std::size_t grid_size) {
  const std::size_t n = samples.size();
  if (n < 2) throw input_error("kde: need at least 2 samples");
  if (grid_size < 2) throw input_error("kde: grid_size must be >= 2");

  double mean = 0.0;
  for (double x : samples) {
    if (!std::isfinite(x)) throw input_error("kde: non-finite sample");
    mean += x;
  }
  mean /= static_cast<double>(n);
  double sse = 0.0;
  for (double x : samples) sse += (x - mean) * (x - mean);
  const double sd = std::sqrt(sse / static_cast<double>(n - 1));
  if (!(sd > 0.0)) {
    throw input_error("kde: degenerate (constant) sample set, bandwidth would be 0");
  }

  std::vector<double> sorted = samples;
  std::sort(sorted.begin(), sorted.end());
  const double iqr = quantile_sorted(sorted, 0.75) - quantile_sorted(sorted, 0.25);
  const double spread = iqr > 0.0 ? std::min(sd, iqr / 1.34) : sd;
  const double h = 0.9 * spread * std::pow(static_cast<double>(n), -0.2);

  DensityEstimate est;
  est.bandwidth = h;
  const double lo = sorted.front() - 3.0 * h;
  const double hi = sorted.back() + 3.0 * h;
  const double step = (hi - lo) / static_cast<double>(grid_size - 1);
  est.grid.resize(grid_size);
  est.values.resize(grid_size);
  const double inv_h = 1.0 / h;
  const double scale = kInvSqrt2Pi * inv_h / static_cast<double>(n);
  for (std::size_t i = 0; i < grid_size; ++i) {
    const double x = lo + step * static_cast<double>(i);
    est.grid[i] = x;
    double acc = 0.0;
    for (double s : sorted) {
      const double z = (x - s) * inv_h;
      acc += std::exp(-0.5 * z * z);
    }
    est.values[i] = scale * acc;
  }

  const double integral = trapezoid(est.grid, est.values);
  if (!(integral > 0.0)) throw numerical_error("kde: non-positive integral");
  for (double& v : est.values) v /= integral;
  return est;
}

namespace {

void check_estimate(const DensityEstimate& d, const char* name) {
  if (d.grid.size() != d.values.size() || d.grid.size() < 2) {
    throw input_error(std::string("relative distance: estimate ") + name +
                      " needs grid/values of equal length >= 2");
  }
}

// Linear interpolation, zero outside the estimate's own grid.
double interp_or_zero(const DensityEstimate& d, double x) {
  if (x <= d.grid.front() || x >= d.grid.back()) {
    return x == d.grid.front() ? d.values.front() : (x == d.grid.back() ? d.values.back() : 0.0);
  }
  const auto it = std::upper_bound(d.grid.begin(), d.grid.end(), x);
  const std::size_t hi = static_cast<std::size_t>(it - d.grid.begin());
  const std::size_t lo = hi - 1;
  const double t = (x - d.grid[lo]) / (d.grid[hi] - d.grid[lo]);
  return d.values[lo] + t * (d.values[hi] - d.values[lo]);
}

struct SharedGrid {
  std::vector<double> grid;
  std::vector<double> p;
  std::vector<double> q;
};

// Union-span grid; both densities re-interpolated and renormalized on it.
SharedGrid shared_grid(const DensityEstimate& p, const DensityEstimate& q,
                       std::size_t grid_size = 512) {
  check_estimate(p, "p");
  check_estimate(q, "q");
  SharedGrid s;
  const double lo = std::min(p.grid.front(), q.grid.front());
  const double hi = std::max(p.grid.back(), q.grid.back());
  const double step = (hi - lo) / static_cast<double>(grid_size - 1);
  s.grid.resize(grid_size);
  s.p.resize(grid_size);
  s.q.resize(grid_size);
  for (std::size_t i = 0; i < grid_size; ++i) {
    const double x = lo + step * static_cast<double>(i);
    s.grid[i] = x;
    s.p[i] = interp_or_zero(p, x);
    s.q[i] = interp_or_zero(q, x);
  }
  const double ip = trapezoid(s.grid, s.p);
  const double iq = trapezoid(s.grid, s.q);
  if (!(ip > 0.0) || !(iq > 0.0)) {
    throw input_error("relative distance: density integrates to zero on the shared grid");
  }
  for (auto& v : s.p) v /= ip;
  for (auto& v : s.q) v /= iq;
  return s;
}

}  // namespace

double relative_l1(const DensityEstimate& p, const DensityEstimate& q) {
  const SharedGrid s = shared_grid(p, q);
  std::vector<double> absdiff(s.grid.size()), absp(s.grid.size());
  for (std::size_t i = 0; i < s.grid.size(); ++i) {
    absdiff[i] = std::abs(s.p[i] - s.q[i]);
    absp[i] = std::abs(s.p[i]);
  }
  return trapezoid(s.grid, absdiff) / trapezoid(s.grid, absp);
}

double relative_l2(const DensityEstimate& p, const DensityEstimate& q) {
  const SharedGrid s = shared_grid(p, q);
  std::vector<double> sqdiff(s.grid.size()), sqp(s.grid.size());
  for (std::size_t i = 0; i < s.grid.size(); ++i) {
    const double d = s.p[i] - s.q[i];
    sqdiff[i] = d * d;
    sqp[i] = s.p[i] * s.p[i];
  }
  return std::sqrt(trapezoid(s.grid, sqdiff)) / std::sqrt(trapezoid(s.grid, sqp));
}

double split_rhat(const std::vector<double>& draws) {
  if (draws.size() < 4) throw input_error("split_rhat: need at least 4 draws");
  const std::size_t half = draws.size() / 2;
  // If the length is odd the middle draw is dropped.
  const double* first = draws.data();
  const double* second = draws.data() + (draws.size() - half);

  auto mean_of = [half](const double* block) {
    double m = 0.0;
    for (std::size_t i = 0; i < half; ++i) m += block[i];
    return m / static_cast<double>(half);
  };
  auto var_of = [half](const double* block, double m) {
    double sse = 0.0;
    for (std::size_t i = 0; i < half; ++i) sse += (block[i] - m) * (block[i] - m);
    return sse / static_cast<double>(half - 1);
  };

  const double m1 = mean_of(first);
  const double m2 = mean_of(second);
  const double w = 0.5 * (var_of(first, m1) + var_of(second, m2));
  if (!(w > 0.0)) {
    warn("split_rhat: zero within-chain variance (constant chain); reporting +inf");
    return std::numeric_limits<double>::infinity();
  }
  const double grand = 0.5 * (m1 + m2);
  const double nd = static_cast<double>(half);
  const double b = nd * ((m1 - grand) * (m1 - grand) + (m2 - grand) * (m2 - grand));
  const double var_plus = (nd - 1.0) / nd * w + b / nd;
  return std::sqrt(var_plus / w);
}

double effective_sample_size(const std::vector<double>& draws) {
  const std::size_t n = draws.size();
  if (n < 10) throw input_error("effective_sample_size: need at least 10 draws");
  double mean = 0.0;
  for (double x : draws) mean += x;
  mean /= static_cast<double>(n);

  auto autocov = [&](std::size_t lag) {
    double acc = 0.0;
    for (std::size_t i = 0; i + lag < n; ++i) {
      acc += (draws[i] - mean) * (draws[i + lag] - mean);
    }
    return acc / static_cast<double>(n);
  };

  const double gamma0 = autocov(0);
  if (!(gamma0 > 0.0)) {
    warn("effective_sample_size: constant chain; reporting N");
    return static_cast<double>(n);
  }

  // Geyer initial positive sequence: sum pair autocorrelations while the
  // pair sums stay positive.
  double tau = 0.0;
  for (std::size_t k = 0;; ++k) {
    const std::size_t lag0 = 2 * k;
    const std::size_t lag1 = 2 * k + 1;
    if (lag1 >= n - 1) break;
    const double pair = (autocov(lag0) + autocov(lag1)) / gamma0;
    if (pair <= 0.0) break;
    tau += 2.0 * pair;
  }
  tau -= 1.0;  // the lag-0 term is counted once, not twice
  if (!(tau > 0.0)) return static_cast<double>(n);
  const double ess = static_cast<double>(n) / tau;
  return std::min(ess, static_cast<double>(n));
}

}  // namespace h2s
