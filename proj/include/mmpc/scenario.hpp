#pragma once

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "mmpc/errors.hpp"

namespace mmpc {

enum class BeamformerStrategy { Mrc, CentralizedMmse };
enum class ApPlacement { Grid, Random };
enum class ClusterRule { PilotMaster, All };

// Line-of-sight power model for the Rician factor.
enum class RicianModel {
  DistanceBased,  // kappa_dB = 13 - 0.03 * d(m), clamped to >= -10 dB
  FixedDb,
  Rayleigh,  // kappa = 0
  PureLos,   // kappa = infinity
};

// Full simulation scenario: network geometry, channel model, solver knobs.
struct ScenarioConfig {
  // [network]
  double area_side = 1000.0;  // m
  int num_aps = 16;           // L
  int antennas_per_ap = 4;    // M
  int num_users = 25;         // N
  double bandwidth = 20e6;    // Hz
  double carrier_freq = 3.7e9;  // Hz
  ApPlacement ap_placement = ApPlacement::Grid;

  // [channel]
  double sigma_sf_db = 8.0;
  double delta_h = 11.0;  // m, AP-user height difference
  double antenna_spacing = 0.5;  // wavelengths
  double angular_spread_deg = 15.0;
  RicianModel rician_model = RicianModel::DistanceBased;
  double rician_kappa_db = 0.0;  // only for FixedDb
  double noise_figure_db = 7.0;
  double pilot_power_mw = 200.0;
  int tau_c = 200;
  int tau_p = 10;
  BeamformerStrategy beamformer = BeamformerStrategy::CentralizedMmse;
  ClusterRule cluster_rule = ClusterRule::PilotMaster;

  // [solver]
  double p_max = 200.0;  // mW
  std::string norm = "linf";
  double tolerance = 1e-8;
  int max_iterations = 500;

  // [output]
  int sample_count = 500;  // S
  std::uint64_t seed = 1;

  int total_antennas() const { return num_aps * antennas_per_ap; }  // K

  double pre_log_factor() const { return 1.0 - static_cast<double>(tau_p) / tau_c; }

  // Thermal noise power in mW: -174 dBm/Hz + 10 log10(B) + noise figure.
  double noise_power_mw() const {
    const double dbm = -174.0 + 10.0 * std::log10(bandwidth) + noise_figure_db;
    return std::pow(10.0, dbm / 10.0);
  }

  void validate() const {
    auto require = [](bool ok, const std::string& what) {
      if (!ok) throw ParseError(what);
    };
    require(area_side > 0.0, "area_side must be positive");
    require(num_aps >= 1, "L must be >= 1");
    require(antennas_per_ap >= 1, "M must be >= 1");
    require(num_users >= 1, "N must be >= 1");
    require(bandwidth > 0.0, "bandwidth must be positive");
    require(carrier_freq > 0.0, "carrier_freq must be positive");
    require(sigma_sf_db >= 0.0, "sigma_sf must be nonnegative");
    require(delta_h >= 0.0, "delta_h must be nonnegative");
    require(antenna_spacing > 0.0, "antenna_spacing must be positive");
    require(angular_spread_deg >= 0.0, "angular_spread_deg must be nonnegative");
    require(noise_figure_db >= 0.0, "noise_figure_db must be nonnegative");
    require(pilot_power_mw > 0.0, "pilot_power must be positive");
    require(tau_p >= 1, "tau_p must be >= 1");
    require(tau_c >= 1, "tau_c must be >= 1");
    require(tau_p <= tau_c, "tau_p must not exceed tau_c");
    require(p_max > 0.0, "p_max must be positive");
    require(tolerance > 0.0, "tolerance must be positive");
    require(max_iterations >= 1, "max_iterations must be >= 1");
    require(sample_count >= 1, "samples must be >= 1");
    require(norm == "l1" || norm == "l2" || norm == "linf", "norm must be l1, l2, or linf");
  }
};

namespace detail {

inline std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

inline double parse_number(const std::string& value, int line) {
  try {
    std::size_t pos = 0;
    const double x = std::stod(value, &pos);
    if (pos != value.size()) throw std::invalid_argument(value);
    return x;
  } catch (const std::exception&) {
    throw ParseError(line, "expected a number, got '" + value + "'");
  }
}

inline long parse_integer(const std::string& value, int line) {
  const double x = parse_number(value, line);
  if (x != std::floor(x)) throw ParseError(line, "expected an integer, got '" + value + "'");
  return static_cast<long>(x);
}

}  // namespace detail

// Parses a line-oriented `key = value` document with bracketed section
// headers [network] [channel] [solver] [output]. Unknown keys are errors;
// missing keys keep their defaults; a repeated key is last-wins with a
// warning appended to `warnings`.
inline ScenarioConfig parse_scenario(const std::string& text,
                                     std::vector<std::string>* warnings = nullptr) {
  ScenarioConfig config;
  std::map<std::string, int> seen;  // "section.key" -> first line
  std::string section;

  std::istringstream stream(text);
  std::string raw;
  int line_no = 0;
  while (std::getline(stream, raw)) {
    ++line_no;
    std::string line = raw;
    if (const std::size_t hash = line.find('#'); hash != std::string::npos) {
      line = line.substr(0, hash);
    }
    line = detail::trim(line);
    if (line.empty()) continue;

    if (line.front() == '[') {
      if (line.back() != ']') throw ParseError(line_no, "unterminated section header");
      section = detail::trim(line.substr(1, line.size() - 2));
      if (section != "network" && section != "channel" && section != "solver" &&
          section != "output") {
        throw ParseError(line_no, "unknown section [" + section + "]");
      }
      continue;
    }

    const std::size_t eq = line.find('=');
    if (eq == std::string::npos) throw ParseError(line_no, "expected 'key = value'");
    const std::string key = detail::trim(line.substr(0, eq));
    const std::string value = detail::trim(line.substr(eq + 1));
    if (key.empty() || value.empty()) throw ParseError(line_no, "empty key or value");
    if (section.empty()) throw ParseError(line_no, "key '" + key + "' before any section header");

    const std::string qualified = section + "." + key;
    if (auto [it, inserted] = seen.emplace(qualified, line_no); !inserted) {
      if (warnings) {
        warnings->push_back("line " + std::to_string(line_no) + ": '" + key +
                            "' repeats the value from line " + std::to_string(it->second) +
                            "; last value wins");
      }
      it->second = line_no;
    }

    auto num = [&] { return detail::parse_number(value, line_no); };
    auto integer = [&] { return detail::parse_integer(value, line_no); };

    if (section == "network") {
      if (key == "area_side") config.area_side = num();
      else if (key == "L") config.num_aps = static_cast<int>(integer());
      else if (key == "M") config.antennas_per_ap = static_cast<int>(integer());
      else if (key == "N") config.num_users = static_cast<int>(integer());
      else if (key == "bandwidth") config.bandwidth = num();
      else if (key == "carrier_freq") config.carrier_freq = num();
      else if (key == "ap_placement") {
        if (value == "grid") config.ap_placement = ApPlacement::Grid;
        else if (value == "random") config.ap_placement = ApPlacement::Random;
        else throw ParseError(line_no, "ap_placement must be grid or random");
      } else {
        throw ParseError(line_no, "unknown key '" + key + "' in [network]");
      }
    } else if (section == "channel") {
      if (key == "sigma_sf") config.sigma_sf_db = num();
      else if (key == "delta_h") config.delta_h = num();
      else if (key == "antenna_spacing") config.antenna_spacing = num();
      else if (key == "angular_spread_deg") config.angular_spread_deg = num();
      else if (key == "rician_model") {
        if (value == "distance") config.rician_model = RicianModel::DistanceBased;
        else if (value == "fixed") config.rician_model = RicianModel::FixedDb;
        else if (value == "rayleigh") config.rician_model = RicianModel::Rayleigh;
        else if (value == "pure_los") config.rician_model = RicianModel::PureLos;
        else throw ParseError(line_no, "rician_model must be distance, fixed, rayleigh, or pure_los");
      } else if (key == "rician_kappa_db") config.rician_kappa_db = num();
      else if (key == "noise_figure_db") config.noise_figure_db = num();
      else if (key == "pilot_power") config.pilot_power_mw = num();
      else if (key == "tau_c") config.tau_c = static_cast<int>(integer());
      else if (key == "tau_p") config.tau_p = static_cast<int>(integer());
      else if (key == "beamformer") {
        if (value == "mrc") config.beamformer = BeamformerStrategy::Mrc;
        else if (value == "mmse") config.beamformer = BeamformerStrategy::CentralizedMmse;
        else throw ParseError(line_no, "beamformer must be mrc or mmse");
      } else if (key == "cluster_rule") {
        if (value == "pilot_master") config.cluster_rule = ClusterRule::PilotMaster;
        else if (value == "all") config.cluster_rule = ClusterRule::All;
        else throw ParseError(line_no, "cluster_rule must be pilot_master or all");
      } else {
        throw ParseError(line_no, "unknown key '" + key + "' in [channel]");
      }
    } else if (section == "solver") {
      if (key == "p_max") config.p_max = num();
      else if (key == "norm") {
        if (value != "l1" && value != "l2" && value != "linf") {
          throw ParseError(line_no, "norm must be l1, l2, or linf");
        }
        config.norm = value;
      } else if (key == "tolerance") config.tolerance = num();
      else if (key == "max_iterations") config.max_iterations = static_cast<int>(integer());
      else throw ParseError(line_no, "unknown key '" + key + "' in [solver]");
    } else {  // output
      if (key == "samples") config.sample_count = static_cast<int>(integer());
      else if (key == "seed") config.seed = static_cast<std::uint64_t>(integer());
      else throw ParseError(line_no, "unknown key '" + key + "' in [output]");
    }
  }

  config.validate();
  return config;
}

}  // namespace mmpc
