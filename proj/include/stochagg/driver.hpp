#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "stochagg/config.hpp"
#include "stochagg/stepper.hpp"

namespace stochagg {

inline constexpr std::string_view kManifestFormat = "stochagg-manifest";
inline constexpr int kManifestVersion = 1;

std::string_view code_version();

struct CommandOptions {
  std::string command_line;              // echoed into the manifest
  std::optional<std::string> out_dir;    // overrides output.dir
  std::optional<unsigned> workers;       // overrides ensemble.workers
};

struct CommandResult {
  std::filesystem::path out_dir;
  std::vector<std::string> outputs;  // paths relative to out_dir, manifest last
  std::optional<BlowUpReport> blowup;
  std::string summary;               // one human-readable line
};

// Single path. On blow-up writes blowup.txt, skips the manifest and sets `blowup`.
CommandResult run_command(const ConfigStore& config, const CommandOptions& options);
// Ensemble of ensemble.paths; blow-up when more than 10% of paths fail.
CommandResult ensemble_command(const ConfigStore& config, const CommandOptions& options);
// Spectral Galerkin solver with the same outputs as `run`.
CommandResult galerkin_command(const ConfigStore& config, const CommandOptions& options);

struct ConvergenceOptions {
  std::string mode = "heat";  // heat | milstein
  std::vector<int> cells{16, 32, 64, 128};
  double T = 1.0;
  double dt_fraction = 0.5;
  std::size_t paths = 1000;
  std::uint64_t seed = 0;
};
CommandResult convergence_command(const ConvergenceOptions& conv, const CommandOptions& options);

struct FigsOptions {
  int cells = 64;
  std::size_t paths = 8;
  std::uint64_t seed = 0;
  bool both_inits = false;
  std::vector<int> figures{1, 2, 3, 4, 5, 6, 7};
  double T = 12.0;
  double dt_fraction = 1.0;
  double perturb_delta = 0.1;
  unsigned workers = 1;
};
// Figure analogues: fig1..fig5 snapshot series, fig6/fig7 mass curves.
CommandResult figs_command(const FigsOptions& figs, const CommandOptions& options);

// Config store for one figure (1..5 single run; 6/7 base settings).
ConfigStore figure_config(int figure, const FigsOptions& figs, bool symmetrized);

// Re-runs the command recorded in a manifest.json.
CommandResult rerun_manifest(const std::string& manifest_path, const CommandOptions& options);

}  // namespace stochagg
