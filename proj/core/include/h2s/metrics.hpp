#ifndef H2S_METRICS_HPP
#define H2S_METRICS_HPP

#include <cstddef>
#include <vector>

#include "h2s/errors.hpp"

namespace h2s {

/// Smoothed marginal posterior on a uniform grid; integrates to 1 by
/// trapezoid up to grid error.
struct DensityEstimate {
  std::vector<double> grid;
  std::vector<double> values;
  double bandwidth = 0.0;
};

/// Trapezoid quadrature over a (not necessarily uniform) grid.
double trapezoid(const std::vector<double>& grid, const std::vector<double>& values);

/// Gaussian-kernel density estimate with Silverman bandwidth
/// 0.9 * min(SD, IQR/1.34) * N^(-1/5) (SD alone if the IQR degenerates),
/// evaluated on grid_size points spanning [min - 3h, max + 3h] and
/// renormalized on the grid. Throws input_error on constant samples.
DensityEstimate kde(const std::vector<double>& samples, std::size_t grid_size = 512);

/// Relative L1 distance: trapz |p - q| / trapz |p| after both estimates
/// are linearly re-interpolated and renormalized on a shared grid spanning
/// the union of their supports. Non-overlapping supports give ~2.
double relative_l1(const DensityEstimate& p, const DensityEstimate& q);

/// Relative L2 distance: sqrt(trapz (p - q)^2) / sqrt(trapz p^2) on the
/// same shared grid.
double relative_l2(const DensityEstimate& p, const DensityEstimate& q);

/// Split-chain potential scale reduction: the chain is halved and the
/// two halves treated as parallel chains. >= 1 up to rounding; +inf (with
/// a warning) on a constant chain. Requires >= 4 draws.
double split_rhat(const std::vector<double>& draws);

/// Effective sample size via Geyer's initial-positive-sequence estimator
/// on the empirical autocorrelations, clamped to (0, N]. A constant chain
/// reports N with a degeneracy warning. Requires >= 10 draws.
double effective_sample_size(const std::vector<double>& draws);

}  // namespace h2s

#endif
