#include "h2s/densities.hpp"

#include <cmath>

namespace h2s {

namespace {
constexpr double kLog2Pi = 1.8378770664093454835606594728112;
}

double log_normal_density(double x, double mean, double variance) {
  if (!(variance > 0.0) || !std::isfinite(variance)) {
    throw domain_error("log_normal_density: variance must be positive and finite");
  }
  const double r = x - mean;
  return -0.5 * (kLog2Pi + std::log(variance)) - r * r / (2.0 * variance);
}

double log_invgamma_density(double x, double shape, double rate) {
  if (!(shape > 0.0) || !(rate > 0.0)) {
    throw domain_error("log_invgamma_density: shape and rate must be positive");
  }
  if (!(x > 0.0)) {
    throw domain_error("log_invgamma_density: x must be positive");
  }
  return shape * std::log(rate) - std::lgamma(shape) - (shape + 1.0) * std::log(x) - rate / x;
}

double log_group_likelihood(const Moments& stats, double theta, double sigma2) {
  if (!(sigma2 > 0.0) || !std::isfinite(sigma2)) {
    throw domain_error("log_group_likelihood: sigma2 must be positive and finite");
  }
  const double n = static_cast<double>(stats.count);
  return -0.5 * n * (kLog2Pi + std::log(sigma2)) - stats.sse(theta) / (2.0 * sigma2);
}

}  // namespace h2s
