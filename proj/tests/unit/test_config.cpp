#include <cstdlib>
#include <fstream>

#include "doctest.h"
#include "proxfi/config.hpp"
#include "proxfi/errors.hpp"
#include "proxfi/random.hpp"

using namespace proxfi;

namespace {

ExperimentConfig random_config(Rng& rng) {
  auto u = [&] { return uniform01(rng); };
  ExperimentConfig c;
  const char* targets[] = {"gaussian(0,1)", "mixture2(-2,2,1)", "doublewell(1,4)", "doublewell2d(1,4)"};
  c.target = targets[static_cast<int>(u() * 4)];
  c.mode = static_cast<ExperimentMode>(static_cast<int>(u() * 8));
  c.h = u() * 1e-3;
  c.h_over_L = u();
  c.steps = 1 + static_cast<int>(u() * 500);
  c.rgo_mode = static_cast<RgoMode>(static_cast<int>(u() * 3));
  c.inner_method = static_cast<InnerMethod>(static_cast<int>(u() * 3));
  c.inner_step = std::ldexp(u(), -static_cast<int>(u() * 40));
  c.delta = 1.0 / 3.0 * u();
  c.init_mean = -1e10 * u();
  c.init_tilt = u() - 0.5;
  c.eps_mix = {u(), 0.0};
  c.epsilons = {u() + 1e-300};
  c.seeds = {rng(), rng(), 0};
  c.heat_orders = {2 + static_cast<int>(u() * 5)};
  c.heat_times.clear();
  c.ula_budget = static_cast<long>(u() * 1e9);
  c.smoothness = u() * 100;
  c.output_dir = "dir with spaces/" + std::to_string(rng() % 1000);
  return c;
}

}  // namespace

TEST_SUITE("config") {

TEST_CASE("defaults parse from the schema version alone") {
  const auto c = parse_config("schema_version = 1\n");
  CHECK(c == ExperimentConfig{});
}

TEST_CASE("serialize then parse returns the same config") {
  Rng rng = make_stream(77, 0);
  for (int i = 0; i < 300; ++i) {
    const auto c = random_config(rng);
    const auto text = serialize_config(c);
    INFO(text);
    REQUIRE(parse_config(text) == c);
    CHECK(serialize_config(parse_config(text)) == text);
  }
}

TEST_CASE("comments, whitespace and list values") {
  const auto c = parse_config(
      "# header\n"
      "schema_version = 1   # trailing comment\n"
      "   mode =   sweep_epsilon\n"
      "epsilons = 0.5, 0.25 ,0.125\n"
      "seeds = 3,4\n"
      "heat_scaled_times =\n");
  CHECK(c.mode == ExperimentMode::sweep_epsilon);
  CHECK(c.epsilons == std::vector<double>{0.5, 0.25, 0.125});
  CHECK(c.seeds == std::vector<std::uint64_t>{3, 4});
  CHECK(c.heat_scaled_times.empty());
}

TEST_CASE("malformed configs are rejected with the offending token") {
  auto message = [](const std::string& text) {
    try {
      parse_config(text);
    } catch (const ConfigError& e) {
      return std::string(e.what());
    }
    return std::string("no error");
  };
  CHECK(message("mode = verify_ideal\n").find("schema_version") != std::string::npos);
  CHECK(message("schema_version = 2\n").find("schema_version") != std::string::npos);
  CHECK(message("schema_version = 1\nwibble = 3\n").find("wibble") != std::string::npos);
  CHECK(message("schema_version = 1\nsteps = 3\nsteps = 4\n").find("duplicate") != std::string::npos);
  CHECK(message("schema_version = 1\nsteps = three\n").find("three") != std::string::npos);
  CHECK(message("schema_version = 1\nmode = sample\n").find("sample") != std::string::npos);
  CHECK(message("schema_version = 1\ntarget = banana(1)\n").find("banana") != std::string::npos);
  CHECK(message("schema_version = 1\nsteps = 0\n").find("steps") != std::string::npos);
  CHECK(message("schema_version = 1\nh 0.5\n").find("line 2") != std::string::npos);
  CHECK(message("schema_version = 1\ninit = uniform\n").find("uniform") != std::string::npos);
}

TEST_CASE("PROXFI_SEED replaces the seed list") {
  auto c = parse_config("schema_version = 1\nseeds = 1, 2, 3\n");
  ::setenv("PROXFI_SEED", "42", 1);
  apply_environment(c);
  ::unsetenv("PROXFI_SEED");
  CHECK(c.seeds == std::vector<std::uint64_t>{42});
  apply_environment(c);
  CHECK(c.seeds == std::vector<std::uint64_t>{42});
  ::setenv("PROXFI_SEED", "not-a-seed", 1);
  CHECK_THROWS_AS(apply_environment(c), ConfigError);
  ::unsetenv("PROXFI_SEED");
}

TEST_CASE("shipped example configs load") {
  for (const char* name : {"verify_ideal_gaussian", "verify_ideal_doublewell", "verify_perturbed_doublewell",
                           "mc_exact_mixture", "mc_smoothed_gaussian", "ula_baseline", "restart_gaussian",
                           "sweep_doublewell", "check_lemmas", "failing_heat_bound"}) {
    INFO(name);
    CHECK_NOTHROW(load_config(std::string(PROXFI_SOURCE_DIR) + "/configs/" + name + ".conf"));
  }
  CHECK_THROWS_AS(load_config("/nonexistent/proxfi.conf"), ConfigError);
}

}  // TEST_SUITE
