#include <doctest.h>

#include <filesystem>

#include "h2s/chain_store.hpp"
#include "h2s/rng.hpp"

using namespace h2s;
namespace fs = std::filesystem;

namespace {

ChainStore sample_store() {
  ChainStore store;
  store.meta.total_iters = 12;
  store.meta.burn_in = 2;
  store.meta.thin = 1;
  store.meta.seed = 5;
  store.meta.sampler = "full-gibbs";
  store.meta.wall_seconds = 1.25;
  auto& mu = store.add_family("mu", {"mu"});
  auto& theta = store.add_family("theta", {"theta_0", "theta_1"});
  Rng rng(3);
  for (int i = 0; i < 10; ++i) {
    mu.chains[0].push_back(draw_normal(rng, 0.0, 1.0));
    theta.chains[0].push_back(draw_normal(rng, 1.0, 2.0));
    theta.chains[1].push_back(draw_normal(rng, -1.0, 0.5));
  }
  return store;
}

}  // namespace

TEST_CASE("chain store save/load round-trips values bit-exactly") {
  const ChainStore store = sample_store();
  const auto dir = fs::temp_directory_path() / "h2s_chains_test";
  fs::remove_all(dir);
  save_chains(store, dir);
  const ChainStore back = load_chains(dir);

  CHECK(back.meta.total_iters == 12);
  CHECK(back.meta.burn_in == 2);
  CHECK(back.meta.seed == 5);
  CHECK(back.meta.sampler == "full-gibbs");
  REQUIRE(back.families.size() == 2);
  const ParamFamily* theta = back.find("theta");
  REQUIRE(theta != nullptr);
  CHECK(theta->labels == std::vector<std::string>{"theta_0", "theta_1"});
  CHECK(theta->chains == store.find("theta")->chains);
  CHECK(back.find("mu")->chains == store.find("mu")->chains);
  fs::remove_all(dir);
}

TEST_CASE("check() rejects ragged or non-finite stores") {
  ChainStore store = sample_store();
  store.families[0].chains[0].push_back(1.0);  // now longer than retained()
  CHECK_THROWS_AS(store.check(), numerical_error);

  ChainStore nan_store = sample_store();
  nan_store.families[1].chains[1][3] = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(nan_store.check(), numerical_error);
}

TEST_CASE("loading a missing directory fails cleanly") {
  CHECK_THROWS_AS(load_chains(fs::temp_directory_path() / "h2s_does_not_exist"), input_error);
}
