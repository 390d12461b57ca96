#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

#include "ugvbs/scenario.hpp"

using namespace ugvbs;

namespace {

std::filesystem::path temp_file(const std::string &name) {
  auto dir = std::filesystem::temp_directory_path() / "ugvbs_test_scenario";
  std::filesystem::create_directories(dir);
  return dir / name;
}

GenerateOptions small_opts(std::uint64_t seed) {
  GenerateOptions o;
  o.seed = seed;
  o.num_vertices = 6;
  o.num_users = 4;
  return o;
}

} // namespace

TEST_CASE("pathloss follows the power law") {
  ChannelModelConfig cfg;
  CHECK(pathloss(1.0, cfg) == doctest::Approx(1e-3).epsilon(1e-15));
  CHECK(pathloss(4.0, cfg) == doctest::Approx(3.125e-5).epsilon(1e-12));
  cfg.ref_d0 = 3.0;
  cfg.pathloss_rho0 = 0.2;
  CHECK(pathloss(3.0, cfg) == doctest::Approx(0.2).epsilon(1e-15));
  CHECK_THROWS_AS(pathloss(0.0, cfg), std::domain_error);
  CHECK_THROWS_AS(pathloss(-1.0, cfg), std::domain_error);
}

TEST_CASE("dBm conversion") {
  CHECK(dbm_to_watt(-70.0) == doctest::Approx(1e-10).epsilon(1e-12));
  CHECK(dbm_to_watt(30.0) == doctest::Approx(1.0));
  CHECK(watt_to_dbm(1e-15) == doctest::Approx(-120.0));
  for (double dbm = -130; dbm <= 10; dbm += 7.5)
    CHECK(watt_to_dbm(dbm_to_watt(dbm)) == doctest::Approx(dbm).epsilon(1e-12));
}

TEST_CASE("generated scenario matches the setup and is valid") {
  GenerateOptions o;
  o.seed = 11;
  const Scenario s = generate_scenario(o);
  REQUIRE(s.num_vertices() == 15);
  REQUIRE(s.num_users() == 10);
  CHECK_NOTHROW(s.validate());
  for (const auto &p : s.vertex_positions) {
    CHECK(p.x >= 0.0);
    CHECK(p.x <= 20.0);
    CHECK(p.y >= 0.0);
    CHECK(p.y <= 20.0);
  }
  for (std::size_t m = 0; m < 15; ++m) {
    CHECK(s.dist_D(m, m) == 0.0);
    for (std::size_t j = 0; j < 15; ++j)
      CHECK(s.dist_D(m, j) == distance(s.vertex_positions[m], s.vertex_positions[j]));
  }
  for (double g : s.demand_gamma) {
    CHECK(g >= 2.0);
    CHECK(g <= 4.0);
  }
  for (double g : s.gain_gh_sq.data())
    CHECK(g >= 0.0);
  REQUIRE(s.seed.has_value());
  CHECK(*s.seed == 11u);
}

TEST_CASE("single vertex scenario") {
  GenerateOptions o;
  o.num_vertices = 1;
  o.num_users = 1;
  const Scenario s = generate_scenario(o);
  CHECK(s.dist_D == Matrix(1, 1, 0.0));
  CHECK_NOTHROW(s.validate());
}

TEST_CASE("generation is deterministic in the seed") {
  CHECK(generate_scenario(small_opts(5)) == generate_scenario(small_opts(5)));
  CHECK_FALSE(generate_scenario(small_opts(5)) == generate_scenario(small_opts(6)));
  CHECK(scenario_to_json(generate_scenario(small_opts(5))) ==
        scenario_to_json(generate_scenario(small_opts(5))));
}

TEST_CASE("fading none gives the squared path loss") {
  GenerateOptions o = small_opts(3);
  o.channel.fading = Fading::none;
  const Scenario s = generate_scenario(o);
  for (std::size_t k = 0; k < s.num_users(); ++k)
    for (std::size_t m = 0; m < s.num_vertices(); ++m) {
      const double rho =
          pathloss(distance(s.user_positions[k], s.vertex_positions[m]), s.channel_cfg);
      CHECK(s.gain_gh_sq(k, m) == doctest::Approx(rho * rho).epsilon(1e-12));
    }
}

TEST_CASE("rayleigh channel power has mean rho per link and product mean rho^2") {
  std::mt19937_64 rng(99);
  const double rho = 2.5e-4;
  const int n = 100000;
  double sum = 0.0;
  for (int i = 0; i < n; ++i)
    sum += draw_channel_power(rho, Fading::rayleigh, rng);
  // |g|^2 is exponential with mean rho; the standard error is rho/sqrt(n).
  CHECK(sum / n == doctest::Approx(rho).epsilon(0.03));
  CHECK(draw_channel_power(rho, Fading::none, rng) == rho);
}

TEST_CASE("with_noise only changes the noise power") {
  const Scenario s = generate_scenario(small_opts(8));
  Scenario t = with_noise(s, 1e-12);
  CHECK(t.params.noise_N0 == 1e-12);
  t.params.noise_N0 = s.params.noise_N0;
  CHECK(t == s);
}

TEST_CASE("save and load round-trip exactly") {
  Scenario s = generate_scenario(small_opts(21));
  s.dist_D(1, 2) = kInf; // missing edge survives the round trip
  const auto path = temp_file("roundtrip.json");
  save_scenario(s, path);
  const Scenario back = load_scenario(path);
  CHECK(back == s);
  CHECK(scenario_to_json(back) == scenario_to_json(s));
}

TEST_CASE("malformed documents name the offending field") {
  const std::string good = scenario_to_json(generate_scenario(small_opts(2)));

  CHECK_THROWS_AS(scenario_from_json("{ not json"), ParseError);

  auto replace = [&](const std::string &from, const std::string &to) {
    std::string s = good;
    const auto pos = s.find(from);
    REQUIRE(pos != std::string::npos);
    s.replace(pos, from.size(), to);
    return s;
  };

  try {
    scenario_from_json(replace("\"alpha1\":", "\"alpha1_typo\":"));
    FAIL("expected a parse error");
  } catch (const ParseError &e) {
    CHECK(std::string(e.what()).find("alpha1") != std::string::npos);
  }

  try {
    scenario_from_json(replace("\"schema_version\": 1", "\"schema_version\": 99"));
    FAIL("expected a parse error");
  } catch (const ParseError &e) {
    CHECK(std::string(e.what()).find("schema_version") != std::string::npos);
  }
}

TEST_CASE("negative demand is a validation error") {
  Scenario s = generate_scenario(small_opts(4));
  s.demand_gamma[1] = -1.0;
  CHECK_THROWS_AS(s.validate(), ValidationError);

  // Written by hand to bypass save-time checks.
  const auto path = temp_file("negative_gamma.json");
  {
    std::ofstream out(path);
    out << scenario_to_json(s);
  }
  CHECK_THROWS_AS(load_scenario(path), ValidationError);
}

TEST_CASE("parameter validation") {
  PhysicalParams p;
  CHECK_NOTHROW(p.validate());
  p.eta = 1.2;
  CHECK_THROWS_AS(p.validate(), ValidationError);
  p = {};
  p.speed_a = 0.0;
  CHECK_THROWS_AS(p.validate(), ValidationError);
  p = {};
  p.beta = 0.0;
  CHECK_THROWS_AS(p.validate(), ValidationError);

  Scenario s = generate_scenario(small_opts(4));
  s.dist_D(2, 2) = 1e-9;
  CHECK_THROWS_AS(s.validate(), ValidationError);
  CHECK_THROWS_AS(fading_from_string("rician"), ValidationError);
}

TEST_CASE("motion energy per metre") {
  PhysicalParams p;
  CHECK(p.motion_energy_per_metre() * 10.0 == doctest::Approx(76.9));
  p.speed_a = 0.5;
  CHECK(p.motion_energy_per_metre() == doctest::Approx(0.58 + 7.4));
}
