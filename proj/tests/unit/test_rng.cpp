#include <doctest.h>

#include <cmath>
#include <vector>

#include "h2s/rng.hpp"

using namespace h2s;

TEST_CASE("engine and mixing are deterministic and stream-separated") {
  Rng a(123), b(123), c(124);
  for (int i = 0; i < 1000; ++i) {
    const auto va = a();
    CHECK(va == b());
    CHECK(va != c());  // equal outputs across distinct seeds would be astonishing
  }

  // substream derivation is stable and sensitive to every key
  CHECK(mix_seed(1, 2, 3) == mix_seed(1, 2, 3));
  CHECK(mix_seed(1, 2, 3) != mix_seed(1, 2, 4));
  CHECK(mix_seed(1, 2, 3) != mix_seed(1, 3, 3));
  CHECK(mix_seed(1, 2, 3) != mix_seed(2, 2, 3));
  CHECK(mix_seed(0, 0) != mix_seed(0, 1));
}

TEST_CASE("uniform01 stays in [0,1) and uniform01_open in (0,1]") {
  Rng rng(7);
  for (int i = 0; i < 100000; ++i) {
    const double u = uniform01(rng);
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
  }
  Rng rng2(8);
  for (int i = 0; i < 100000; ++i) {
    const double u = uniform01_open(rng2);
    CHECK(u > 0.0);
    CHECK(u <= 1.0);
  }
}

TEST_CASE("uniform_index covers the whole range") {
  Rng rng(11);
  std::vector<int> counts(10, 0);
  for (int i = 0; i < 100000; ++i) counts[uniform_index(rng, 10)]++;
  for (int count : counts) {
    CHECK(count > 9000);
    CHECK(count < 11000);
  }
}

TEST_CASE("normal and gamma transforms have the right moments") {
  // seed-pinned Monte Carlo; tolerances sized for n = 2e5
  const int n = 200000;
  {
    Rng rng(2024);
    double sum = 0.0, sum_sq = 0.0;
    for (int i = 0; i < n; ++i) {
      const double x = draw_normal(rng, 3.0, 4.0);
      sum += x;
      sum_sq += x * x;
    }
    const double mean = sum / n;
    const double var = sum_sq / n - mean * mean;
    CHECK(mean == doctest::Approx(3.0).epsilon(0.01));
    CHECK(var == doctest::Approx(4.0).epsilon(0.02));
  }
  for (double shape : {0.5, 1.0, 2.5, 7.0}) {
    Rng rng(31 + static_cast<std::uint64_t>(shape * 10));
    double sum = 0.0, sum_sq = 0.0;
    for (int i = 0; i < n; ++i) {
      const double x = draw_gamma(rng, shape, 2.0);
      sum += x;
      sum_sq += x * x;
    }
    const double mean = sum / n;
    const double var = sum_sq / n - mean * mean;
    CHECK(mean == doctest::Approx(shape / 2.0).epsilon(0.02));
    CHECK(var == doctest::Approx(shape / 4.0).epsilon(0.05));
  }
}

TEST_CASE("inverse-gamma draws match the analytic mean b/(a-1)") {
  const int n = 100000;
  Rng rng(555);
  double sum = 0.0;
  for (int i = 0; i < n; ++i) sum += draw_inv_gamma(rng, 3.0, 2.0);
  CHECK(sum / n == doctest::Approx(1.0).epsilon(0.01));
}

TEST_CASE("domain errors on invalid sampler arguments") {
  Rng rng(1);
  CHECK_THROWS_AS(draw_normal(rng, 0.0, -1.0), domain_error);
  CHECK_THROWS_AS(draw_standard_gamma(rng, 0.0), domain_error);
  CHECK_THROWS_AS(draw_gamma(rng, 1.0, 0.0), domain_error);
}
