#include <catch2/catch_amalgamated.hpp>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "test_helpers.hpp"

using namespace mmpc;

namespace {

std::string temp_path(const char* name) {
  return (std::filesystem::temp_directory_path() / name).string();
}

std::vector<char> slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

TEST_CASE("empty document yields the full default scenario") {
  const ScenarioConfig config = parse_scenario("");
  CHECK(config.num_aps == 16);
  CHECK(config.antennas_per_ap == 4);
  CHECK(config.num_users == 25);
  CHECK(config.p_max == 200.0);
  CHECK(config.tau_c == 200);
  CHECK(config.tau_p == 10);
  CHECK(config.delta_h == 11.0);
  CHECK(config.sigma_sf_db == 8.0);
  CHECK(config.carrier_freq == 3.7e9);
  CHECK(config.bandwidth == 20e6);
  CHECK(config.norm == "linf");
  CHECK(config.sample_count == 500);
}

TEST_CASE("scenario parsing reads sections, comments, and values") {
  const std::string doc =
      "# full override\n"
      "[network]\n"
      "L = 4\n"
      "M = 2\n"
      "N = 6  # six users\n"
      "[solver]\n"
      "p_max = 100\n"
      "norm = l1\n"
      "[output]\n"
      "samples = 50\n"
      "seed = 9\n";
  const ScenarioConfig config = parse_scenario(doc);
  CHECK(config.num_aps == 4);
  CHECK(config.antennas_per_ap == 2);
  CHECK(config.num_users == 6);
  CHECK(config.p_max == 100.0);
  CHECK(config.norm == "l1");
  CHECK(config.sample_count == 50);
  CHECK(config.seed == 9);
}

TEST_CASE("scenario parse errors carry line numbers") {
  try {
    parse_scenario("[channel]\ntau_p = 0\n");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find("tau_p") != std::string::npos);
  }

  try {
    parse_scenario("[network]\nbogus_key = 1\n");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 2);
    CHECK(std::string(e.what()).find("bogus_key") != std::string::npos);
  }

  CHECK_THROWS_AS(parse_scenario("[nonsense]\n"), ParseError);
  CHECK_THROWS_AS(parse_scenario("L = 4\n"), ParseError);         // key before section
  CHECK_THROWS_AS(parse_scenario("[network]\nL 4\n"), ParseError);  // no '='
  CHECK_THROWS_AS(parse_scenario("[network]\nL = four\n"), ParseError);
  CHECK_THROWS_AS(parse_scenario("[channel]\ntau_p = 300\n"), ParseError);  // > tau_c
}

TEST_CASE("repeated keys are last-wins with a warning") {
  std::vector<std::string> warnings;
  const ScenarioConfig config =
      parse_scenario("[solver]\np_max = 200\np_max = 100\n", &warnings);
  CHECK(config.p_max == 100.0);
  REQUIRE(warnings.size() == 1);
  CHECK(warnings[0].find("p_max") != std::string::npos);
  CHECK(warnings[0].find("line 3") != std::string::npos);
}

TEST_CASE("sample cache round-trips bit-exactly") {
  const SampleSet& set = mmpc_test::scaled_down_set();
  const std::string path = temp_path("mmpc_cache_test.pcss");
  write_sample_cache(set, path);
  const SampleSet loaded = read_sample_cache(path);
  CHECK(loaded.sample_count == set.sample_count);
  CHECK(loaded.num_users == set.num_users);
  CHECK(loaded.dimension == set.dimension);
  CHECK(loaded.noise_power == set.noise_power);
  CHECK(loaded.channels == set.channels);
  CHECK(loaded.beamformers == set.beamformers);

  // Writing the loaded set again produces identical bytes.
  const std::string path2 = temp_path("mmpc_cache_test2.pcss");
  write_sample_cache(loaded, path2);
  CHECK(slurp(path) == slurp(path2));
  std::remove(path.c_str());
  std::remove(path2.c_str());
}

TEST_CASE("sample cache rejects corrupt files") {
  const SampleSet& set = mmpc_test::scaled_down_set();
  const std::string path = temp_path("mmpc_cache_corrupt.pcss");
  write_sample_cache(set, path);
  const std::vector<char> bytes = slurp(path);

  SECTION("truncated body") {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size() / 2));
    out.close();
    CHECK_THROWS_AS(read_sample_cache(path), CacheError);
  }

  SECTION("bad magic") {
    std::vector<char> bad = bytes;
    bad[0] = 'X';
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out.write(bad.data(), static_cast<std::streamsize>(bad.size()));
    out.close();
    CHECK_THROWS_AS(read_sample_cache(path), CacheError);
  }

  SECTION("unsupported version") {
    std::vector<char> bad = bytes;
    bad[4] = 2;
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out.write(bad.data(), static_cast<std::streamsize>(bad.size()));
    out.close();
    try {
      read_sample_cache(path);
      FAIL("expected a cache error");
    } catch (const CacheError& e) {
      CHECK(std::string(e.what()).find("version") != std::string::npos);
    }
  }

  SECTION("trailing bytes") {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    out.put('\0');
    out.close();
    CHECK_THROWS_AS(read_sample_cache(path), CacheError);
  }

  SECTION("missing file") {
    CHECK_THROWS_AS(read_sample_cache(temp_path("does_not_exist.pcss")), CacheError);
  }

  std::remove(path.c_str());
}
