// Command-line front end. Talks to the library only through stochagg.h.
#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "stochagg/stochagg.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitOther = 1;
constexpr int kExitConfig = 2;
constexpr int kExitBlowup = 3;

int exit_code(sagg_status s) {
  switch (s) {
    case SAGG_OK: return kExitOk;
    case SAGG_ERR_CONFIG:
    case SAGG_ERR_ARGUMENT: return kExitConfig;
    case SAGG_ERR_BLOWUP: return kExitBlowup;
    default: return kExitOther;
  }
}

int report(sagg_status s, const char* what) {
  if (s != SAGG_OK) std::cerr << "stochagg " << what << ": " << sagg_status_name(s) << ": " << sagg_last_error() << "\n";
  return exit_code(s);
}

std::optional<std::string> env(const char* name) {
  const char* v = std::getenv(name);
  if (!v || !*v) return std::nullopt;
  return std::string(v);
}

struct Common {
  std::string config;
  std::string manifest;
  std::optional<unsigned long long> seed;
  std::string out_dir;
  std::string backend;
  std::optional<std::size_t> paths;
  std::optional<unsigned> workers;
  std::vector<std::string> sets;
};

void add_common(CLI::App* sub, Common& c, bool with_paths) {
  sub->add_option("--config", c.config, "configuration file")->check(CLI::ExistingFile);
  sub->add_option("--manifest", c.manifest, "re-run the command recorded in a manifest.json")->check(CLI::ExistingFile);
  sub->add_option("--seed", c.seed, "master seed (noise.seed)");
  sub->add_option("--out-dir", c.out_dir, "output directory (env STOCHAGG_OUT_DIR)");
  sub->add_option("--backend", c.backend, "convolution backend")->check(CLI::IsMember({"fft", "direct"}));
  sub->add_option("--set", c.sets, "override, section.key=value (repeatable)");
  if (with_paths) {
    sub->add_option("--paths", c.paths, "number of ensemble paths")->check(CLI::PositiveNumber);
    sub->add_option("--workers", c.workers, "worker threads (env STOCHAGG_THREADS)")->check(CLI::PositiveNumber);
  }
}

std::string resolve_out_dir(const std::string& flag) {
  if (!flag.empty()) return flag;
  return env("STOCHAGG_OUT_DIR").value_or("");
}

unsigned resolve_workers(std::optional<unsigned> flag) {
  if (flag) return *flag;
  if (auto t = env("STOCHAGG_THREADS")) {
    try {
      const long v = std::stol(*t);
      if (v > 0) return static_cast<unsigned>(v);
    } catch (const std::exception&) {
    }
    std::cerr << "stochagg: ignoring invalid STOCHAGG_THREADS='" << *t << "'\n";
  }
  return 0;
}

void print_result(sagg_result* r) {
  if (!r) return;
  std::cout << sagg_result_summary(r) << "\n";
  std::cout << "outputs in " << sagg_result_out_dir(r) << " (" << sagg_result_output_count(r) << " files)\n";
}

using ConfigCommand = sagg_status (*)(const sagg_config*, const sagg_run_options*, sagg_result**);

int config_command(const char* name, ConfigCommand fn, const Common& c, const std::string& command_line) {
  const std::string out_dir = resolve_out_dir(c.out_dir);
  sagg_run_options opts;
  sagg_run_options_init(&opts);
  opts.command_line = command_line.c_str();
  opts.out_dir = out_dir.empty() ? nullptr : out_dir.c_str();
  opts.workers = resolve_workers(c.workers);

  sagg_result* res = nullptr;
  sagg_status s;
  if (!c.manifest.empty()) {
    if (!c.config.empty() || c.seed || !c.backend.empty() || c.paths || !c.sets.empty()) {
      std::cerr << "stochagg " << name << ": --manifest cannot be combined with config overrides\n";
      return kExitConfig;
    }
    s = sagg_rerun_manifest(c.manifest.c_str(), &opts, &res);
  } else {
    if (c.config.empty()) {
      std::cerr << "stochagg " << name << ": --config or --manifest is required\n";
      return kExitConfig;
    }
    sagg_config* cfg = nullptr;
    s = sagg_config_load_file(c.config.c_str(), &cfg);
    if (s != SAGG_OK) return report(s, name);
    auto set = [&](const char* sec, const char* key, const std::string& v) {
      if (s == SAGG_OK) s = sagg_config_set(cfg, sec, key, v.c_str());
    };
    if (c.seed) set("noise", "seed", std::to_string(*c.seed));
    if (!c.backend.empty()) set("grid", "convolution", c.backend);
    if (c.paths) set("ensemble", "paths", std::to_string(*c.paths));
    for (const auto& kv : c.sets) {
      const auto dot = kv.find('.'), eq = kv.find('=');
      if (dot == std::string::npos || eq == std::string::npos || dot > eq) {
        std::cerr << "stochagg " << name << ": --set expects section.key=value, got '" << kv << "'\n";
        sagg_config_free(cfg);
        return kExitConfig;
      }
      set(kv.substr(0, dot).c_str(), kv.substr(dot + 1, eq - dot - 1).c_str(), kv.substr(eq + 1));
    }
    if (s == SAGG_OK) s = fn(cfg, &opts, &res);
    sagg_config_free(cfg);
  }
  print_result(res);
  sagg_result_free(res);
  return report(s, name);
}

std::string join_args(int argc, char** argv) {
  std::string s;
  for (int i = 0; i < argc; ++i) {
    if (i) s += ' ';
    s += argv[i];
  }
  return s;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Stochastic degenerate aggregation-diffusion simulator"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(sagg_version()));

  Common run_c, ens_c, gal_c;
  auto* run = app.add_subcommand("run", "single path with snapshots and diagnostics");
  add_common(run, run_c, false);
  auto* ens = app.add_subcommand("ensemble", "independent paths with ensemble statistics");
  add_common(ens, ens_c, true);
  bool keep_paths = false;
  ens->add_flag("--keep-paths", keep_paths, "write per-path outputs");
  auto* gal = app.add_subcommand("galerkin", "spectral Faedo-Galerkin solver");
  add_common(gal, gal_c, false);
  std::optional<int> modes;
  gal->add_option("--modes", modes, "modes per axis")->check(CLI::PositiveNumber);

  auto* conv = app.add_subcommand("convergence", "refinement studies");
  std::string conv_mode = "heat";
  std::vector<int> conv_cells{16, 32, 64, 128};
  double conv_T = 1.0, conv_frac = 0.5;
  std::size_t conv_paths = 1000;
  unsigned long long conv_seed = 0;
  std::string conv_out;
  std::string conv_manifest;
  conv->add_option("--mode", conv_mode, "heat | milstein")->check(CLI::IsMember({"heat", "milstein"}));
  conv->add_option("--cells", conv_cells, "heat resolutions")->delimiter(',');
  conv->add_option("--T", conv_T, "heat horizon");
  conv->add_option("--dt-fraction", conv_frac, "fraction of the stability bound");
  conv->add_option("--paths", conv_paths, "Milstein paths")->check(CLI::PositiveNumber);
  conv->add_option("--seed", conv_seed, "seed");
  conv->add_option("--out-dir", conv_out, "output directory (env STOCHAGG_OUT_DIR)");
  conv->add_option("--manifest", conv_manifest, "re-run a recorded study")->check(CLI::ExistingFile);

  auto* figs = app.add_subcommand("figs", "figure analogues (snapshots, mass curves)");
  int figs_cells = 64;
  std::size_t figs_paths = 8;
  unsigned long long figs_seed = 0;
  bool both_inits = false;
  std::vector<int> figures{1, 2, 3, 4, 5, 6, 7};
  double figs_T = 12.0, figs_frac = 1.0, figs_delta = 0.1;
  std::optional<unsigned> figs_workers;
  std::string figs_out;
  std::string figs_manifest;
  figs->add_option("--cells", figs_cells, "cells per axis")->check(CLI::PositiveNumber);
  figs->add_option("--paths", figs_paths, "paths per mass curve")->check(CLI::PositiveNumber);
  figs->add_option("--seed", figs_seed, "seed");
  figs->add_flag("--both-inits", both_inits, "also render the symmetrized initial condition");
  figs->add_option("--figures", figures, "subset of 1..7")->delimiter(',')->check(CLI::Range(1, 7));
  figs->add_option("--T", figs_T, "horizon");
  figs->add_option("--dt-fraction", figs_frac, "fraction of the stability bound");
  figs->add_option("--perturb-delta", figs_delta, "initial perturbation for figures 4, 5, 7");
  figs->add_option("--workers", figs_workers, "worker threads (env STOCHAGG_THREADS)")->check(CLI::PositiveNumber);
  figs->add_option("--out-dir", figs_out, "output directory (env STOCHAGG_OUT_DIR)");
  figs->add_option("--manifest", figs_manifest, "re-run a recorded figure set")->check(CLI::ExistingFile);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  const std::string command_line = join_args(argc, argv);
  if (*run) return config_command("run", sagg_run, run_c, command_line);
  if (*ens) {
    if (keep_paths) ens_c.sets.push_back("ensemble.keep_paths=true");
    return config_command("ensemble", sagg_ensemble, ens_c, command_line);
  }
  if (*gal) {
    if (modes) gal_c.sets.push_back("galerkin.modes=" + std::to_string(*modes));
    return config_command("galerkin", sagg_galerkin, gal_c, command_line);
  }

  sagg_run_options opts;
  sagg_run_options_init(&opts);
  opts.command_line = command_line.c_str();
  sagg_result* res = nullptr;
  sagg_status s = SAGG_OK;
  const char* name = *conv ? "convergence" : "figs";
  const std::string out_dir = resolve_out_dir(*conv ? conv_out : figs_out);
  opts.out_dir = out_dir.empty() ? nullptr : out_dir.c_str();
  const std::string& manifest = *conv ? conv_manifest : figs_manifest;
  if (!manifest.empty()) {
    s = sagg_rerun_manifest(manifest.c_str(), &opts, &res);
  } else if (*conv) {
    sagg_convergence_options c;
    sagg_convergence_options_init(&c);
    c.mode = conv_mode.c_str();
    c.cells = conv_cells.data();
    c.n_cells = conv_cells.size();
    c.T = conv_T;
    c.dt_fraction = conv_frac;
    c.paths = conv_paths;
    c.seed = conv_seed;
    s = sagg_convergence(&c, &opts, &res);
  } else {
    sagg_figs_options f;
    sagg_figs_options_init(&f);
    f.cells = figs_cells;
    f.paths = figs_paths;
    f.seed = figs_seed;
    f.both_inits = both_inits ? 1 : 0;
    f.figures = figures.data();
    f.n_figures = figures.size();
    f.T = figs_T;
    f.dt_fraction = figs_frac;
    f.perturb_delta = figs_delta;
    const unsigned w = resolve_workers(figs_workers);
    f.workers = w > 0 ? w : 1;
    s = sagg_figs(&f, &opts, &res);
  }
  print_result(res);
  sagg_result_free(res);
  return report(s, name);
}
