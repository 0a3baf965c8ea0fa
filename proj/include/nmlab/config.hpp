#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "nmlab/coefficients.hpp"
#include "nmlab/grid.hpp"

namespace nmlab {

struct ConfigEntry {
  std::string key;
  std::string raw;
  std::size_t line = 0;
};

struct ConfigSection {
  std::string name;
  std::size_t line = 0;
  std::vector<ConfigEntry> entries;

  const ConfigEntry* find(const std::string& key) const;
};

/// flat INI-style file: [section] headers over key = value lines, '#' comments.
/// Raw value tokens are kept verbatim so a parsed file renders back unchanged
/// up to comments and spacing
class ConfigFile {
 public:
  static ConfigFile parse(const std::string& text);
  static ConfigFile load(const std::string& path);

  std::string render() const;
  const ConfigSection* find(const std::string& name) const;

  std::vector<ConfigSection> sections;
  std::string source;  // text as loaded, fingerprinted into the manifest
};

/// typed entry readers; every failure is a config_error naming the line
double entry_double(const ConfigSection& s, const std::string& key);
double entry_double_or(const ConfigSection* s, const std::string& key, double fallback);
std::size_t entry_size(const ConfigSection& s, const std::string& key);
std::size_t entry_size_or(const ConfigSection* s, const std::string& key, std::size_t fallback);
std::uint64_t entry_u64_or(const ConfigSection* s, const std::string& key, std::uint64_t fallback);
bool entry_bool_or(const ConfigSection* s, const std::string& key, bool fallback);
std::string entry_string(const ConfigSection& s, const std::string& key);
std::string entry_string_or(const ConfigSection* s, const std::string& key,
                            const std::string& fallback);
std::vector<double> entry_double_list(const ConfigSection& s, const std::string& key);
std::vector<std::uint64_t> entry_u64_list_or(const ConfigSection* s, const std::string& key,
                                             const std::vector<std::uint64_t>& fallback);

/// rejects sections and keys outside the fixed schema, anchored to their lines
void validate_known_keys(const ConfigFile& f);

/// analytic initial datum selection shared by the solver and simulator paths
struct InitialSpec {
  std::string kind = "dirac";  // dirac | uniform | gaussian | barenblatt
  double x0 = 0.0;
  double a = -0.5;
  double b = 0.5;
  double mean = 0.0;
  double sd = 1.0;
  double tau0 = 0.1;  // pre-age of a barenblatt start
};

/// every knob an experiment can set, with defaults matching the bundled configs
struct ExperimentConfig {
  std::string name = "experiment";
  std::string kind = "solve";

  std::string coefficient_set = "heat";
  RegistryParams reg;

  GridSpec grid{-10.0, 10.0, 1024};
  bool grid_given = false;

  double start_time = 0.0;
  std::vector<double> output_times;  // starts with start_time

  InitialSpec initial;

  std::size_t n_particles = 10000;
  double dt = 1e-3;
  std::uint64_t seed = 1;
  std::size_t feedback_cells = 1024;

  double verify_r = 0.0;
  double verify_t = 0.0;
  std::string flow_mode = "pde";  // verify-flow: pde | particles
  std::size_t y_bins = 24;
  bool y_bins_given = false;  // unset means bins default to twice the restart bandwidth
  std::size_t min_bin_count = 200;
  std::size_t n_bootstrap = 200;
  double bootstrap_level = 0.99;
  double setup_tol = 0.02;
  double pass_fraction = 0.9;
  bool negative_control = false;
  std::vector<std::uint64_t> seeds{11, 12, 13, 14, 15};
  double flow_tol = 0.05;
  double probe_floor = 1e-10;
  double ck_factor = 5.0;
  double ck_floor = 1e-3;
  std::vector<double> fdd_times;
  std::vector<std::string> fdd_factors;
  double fdd_tol = 0.05;

  std::string out_dir = "out";
  bool out_dir_given = false;
  bool write_csv = true;
  bool write_archive = true;

  std::uint64_t config_hash = 0;
  std::string config_text;

  static ExperimentConfig from_file(const ConfigFile& f);
};

/// coefficient bundle named by the config, built through the registry
CoefficientSet build_coefficients(const ExperimentConfig& cfg);

}  // namespace nmlab
