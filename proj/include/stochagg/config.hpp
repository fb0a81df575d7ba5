#pragma once

#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "stochagg/ensemble.hpp"
#include "stochagg/galerkin.hpp"
#include "stochagg/grid.hpp"
#include "stochagg/model.hpp"
#include "stochagg/stepper.hpp"

namespace stochagg {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct OutputSettings {
  std::string dir = "out";
  bool snapshots = true;
  bool pgm = true;
};

struct EnsembleSettings {
  std::size_t paths = 8;
  unsigned workers = 1;
  int q0 = kDefaultQ0;
  bool sup_every_step = false;
  bool keep_paths = false;
};

// Typed view of a resolved configuration.
struct SimulationConfig {
  ModelSpec model;
  Grid2D grid;
  RunConfig run;
  GalerkinOptions galerkin;
  EnsembleSettings ensemble;
  OutputSettings output;
};

// Flat key/value store over the sections model, grid, time, noise, output,
// galerkin and ensemble. Every key has a documented default except model.ubar.
class ConfigStore {
 public:
  static ConfigStore parse(std::string_view text, std::string_view origin = "<string>");
  static ConfigStore load(const std::string& path);

  // Overrides one key; throws ConfigError for unknown keys.
  void set(std::string_view section, std::string_view key, std::string value);
  std::optional<std::string> get(std::string_view section, std::string_view key) const;
  bool user_set(std::string_view section, std::string_view key) const;

  // Applies defaults, converts and validates. time.dt and model.trunc_M "auto"
  // are resolved here; galerkin epsilon/dt "auto" stay unset (resolved by the solver).
  // Throws ConfigError.
  SimulationConfig resolve() const;

  // Every schema key with its resolved value ("section.key" -> value).
  std::map<std::string, std::string> resolved_values() const;
  // Canonical text form of resolved_values(); parsing it reproduces the run.
  std::string to_ini() const;

  const std::map<std::string, std::string>& user_values() const { return values_; }

 private:
  std::map<std::string, std::string> values_;  // "section.key" -> raw text
  std::string base_dir_;                       // for relative table paths
};

struct ConfigKey {
  std::string_view section;
  std::string_view key;
  std::string_view default_value;
  std::string_view help;
  bool required = false;
};

const std::vector<ConfigKey>& config_schema();

// Smallest N >= T/dt_target (N >= 1) putting every record time on the step lattice.
double aligned_dt(double T, double dt_target, const std::vector<double>& record_times);

}  // namespace stochagg
