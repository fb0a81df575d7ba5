#include "stochagg/driver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "stochagg/ensemble.hpp"
#include "stochagg/galerkin.hpp"
#include "stochagg/io.hpp"
#include "stochagg/noise.hpp"
#include "stochagg/studies.hpp"

#ifndef STOCHAGG_VERSION
#define STOCHAGG_VERSION "0.0.0"
#endif

namespace stochagg {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

std::string_view code_version() { return "stochagg " STOCHAGG_VERSION; }

namespace {

using Clock = std::chrono::steady_clock;

std::string utc_now() {
  const std::time_t t = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// Applies CLI-level overrides on a copy of the store.
ConfigStore with_overrides(const ConfigStore& config, const CommandOptions& options) {
  ConfigStore s = config;
  if (options.out_dir) s.set("output", "dir", *options.out_dir);
  if (options.workers) s.set("ensemble", "workers", std::to_string(*options.workers));
  return s;
}

json config_json(const ConfigStore& store) {
  const auto values = store.resolved_values();
  json cfg = json::object();
  json prov = json::object();
  for (const auto& k : config_schema()) {
    const std::string full = std::string(k.section) + "." + std::string(k.key);
    cfg[std::string(k.section)][std::string(k.key)] = values.at(full);
    const bool user = store.user_set(k.section, k.key);
    const bool derived = !user && k.default_value == "auto";
    prov[full] = user ? "user" : derived ? "derived" : "default";
  }
  json j;
  j["config"] = cfg;
  j["provenance"] = prov;
  j["resolved_config_ini"] = store.to_ini();
  return j;
}

json manifest_head(std::string_view command, const CommandOptions& options, std::uint64_t seed,
                   std::string_view backend) {
  json m;
  m["format"] = kManifestFormat;
  m["version"] = kManifestVersion;
  m["code_version"] = code_version();
  m["command"] = command;
  m["command_line"] = options.command_line.empty() ? std::string(command) : options.command_line;
  m["generator"] = kGeneratorVersion;
  m["seed"] = seed;
  m["backend"] = backend;
  return m;
}

void finish_manifest(json& m, const fs::path& dir, CommandResult& res, Clock::time_point t0, const std::string& started) {
  const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
  m["timing"] = {{"started_utc", started}, {"wall_seconds", secs}};
  res.outputs.push_back("manifest.json");
  m["outputs"] = res.outputs;
  write_text(dir / "manifest.json", m.dump(2) + "\n");
}

void add_written(CommandResult& res, const fs::path& dir, const std::vector<fs::path>& files) {
  for (const auto& f : files) res.outputs.push_back(fs::relative(f, dir).generic_string());
}

json bounds_json(const BoundViolationSummary& b) {
  return {{"tol", b.tol},
          {"node_steps", b.node_steps},
          {"below", b.below},
          {"above", b.above},
          {"fraction", b.fraction()}};
}

json run_json(const RunConfig& rc) {
  return {{"dt", rc.dt},
          {"steps", rc.num_steps()},
          {"stability", to_string(rc.stability)},
          {"clip", to_string(rc.clip)},
          {"white_noise_scaling", rc.white_noise_scaling},
          {"perturbation",
           {{"form", "u0*(1+delta*xi) clamped to [0, ubar-margin]"},
            {"delta", rc.perturb_delta},
            {"margin", rc.perturb_margin}}}};
}

void write_blowup(const fs::path& dir, const std::string& text, CommandResult& res) {
  write_text(dir / "blowup.txt", text + "\n");
  res.outputs.push_back("blowup.txt");
}

CommandResult ensemble_impl(const ConfigStore& config, const CommandOptions& options, EnsembleStats* stats_out);

}  // namespace

CommandResult run_command(const ConfigStore& config, const CommandOptions& options) {
  const auto t0 = Clock::now();
  const std::string started = utc_now();
  const ConfigStore store = with_overrides(config, options);
  const SimulationConfig c = store.resolve();
  CommandResult res;
  res.out_dir = c.output.dir;
  fs::create_directories(res.out_dir);

  const Field u0 = path_initial_condition(initial_condition(c.grid, c.model), c.model, c.run, 0);
  RngStream stream = derive_stream(c.run.seed, 0);
  SeriesCsvSink series(res.out_dir / "series.csv");
  SnapshotSink snaps(res.out_dir, c.output.snapshots, c.output.pgm, c.model.ubar);
  const PathResult r = run_path(u0, c.model, c.run, stream, {&series, &snaps});
  res.outputs.push_back("series.csv");
  add_written(res, res.out_dir, snaps.written());
  write_text(res.out_dir / "mass.csv", mass_series_csv(r));
  res.outputs.push_back("mass.csv");

  if (r.blowup) {
    res.blowup = r.blowup;
    write_blowup(res.out_dir, r.blowup->message(), res);
    res.summary = r.blowup->message();
    return res;
  }

  json m = manifest_head("run", options, c.run.seed, to_string(c.run.backend));
  m.update(config_json(store));
  m["run"] = run_json(c.run);
  m["results"] = {{"final_time", r.final_time},
                  {"mass_initial", r.mass.front()},
                  {"mass_final", r.mass.back()},
                  {"min_u", *std::min_element(r.min_u.begin(), r.min_u.end())},
                  {"max_u", *std::max_element(r.max_u.begin(), r.max_u.end())},
                  {"clamp_total", r.clamp_total},
                  {"bounds", bounds_json(r.bounds)}};
  finish_manifest(m, res.out_dir, res, t0, started);
  char buf[256];
  std::snprintf(buf, sizeof buf, "run: %lld steps, mass %.6g -> %.6g, bound violations %llu",
                static_cast<long long>(c.run.num_steps()), r.mass.front(), r.mass.back(),
                static_cast<unsigned long long>(r.bounds.violations()));
  res.summary = buf;
  return res;
}

CommandResult ensemble_command(const ConfigStore& config, const CommandOptions& options) {
  return ensemble_impl(config, options, nullptr);
}

namespace {

CommandResult ensemble_impl(const ConfigStore& config, const CommandOptions& options, EnsembleStats* stats_out) {
  const auto t0 = Clock::now();
  const std::string started = utc_now();
  const ConfigStore store = with_overrides(config, options);
  const SimulationConfig c = store.resolve();
  CommandResult res;
  res.out_dir = c.output.dir;
  fs::create_directories(res.out_dir);

  EnsembleOptions eo;
  eo.n_paths = c.ensemble.paths;
  eo.workers = c.ensemble.workers;
  eo.q0 = c.ensemble.q0;
  eo.sup_every_step = c.ensemble.sup_every_step;
  SinkFactory factory;
  if (c.ensemble.keep_paths) {
    factory = [&c](std::size_t p) {
      char name[32];
      std::snprintf(name, sizeof name, "path_%04zu", p);
      const fs::path dir = fs::path(c.output.dir) / "paths" / name;
      fs::create_directories(dir);
      std::vector<std::unique_ptr<PathSink>> v;
      v.push_back(std::make_unique<SeriesCsvSink>(dir / "series.csv"));
      v.push_back(std::make_unique<SnapshotSink>(dir, c.output.snapshots, c.output.pgm, c.model.ubar));
      return v;
    };
  }
  const Field u0 = initial_condition(c.grid, c.model);
  const EnsembleResult er = run_ensemble(c.model, u0, c.run, eo, factory);
  const EnsembleStats& st = er.stats;
  if (stats_out) *stats_out = st;

  write_text(res.out_dir / "stats.csv", ensemble_stats_csv(st));
  res.outputs.push_back("stats.csv");
  {
    std::ostringstream os;
    os << "path,sup_l2_sq,grad_A_integral,bound_violations,blowup\n";
    for (const auto& p : er.paths)
      os << p.index << "," << fmt(p.sup_l2_sq) << "," << fmt(p.grad_A_integral) << "," << p.bounds.violations() << ","
         << (p.blowup ? 1 : 0) << "\n";
    write_text(res.out_dir / "paths.csv", os.str());
    res.outputs.push_back("paths.csv");
  }
  {
    std::ostringstream os;
    os << "quantity,value\n";
    os << "paths," << st.path_count << "\nfailed," << st.failed_count << "\n";
    os << "q0," << st.q0 << "\n";
    os << "sup_l2_sq_mean," << fmt(st.sup_l2_sq_mean) << "\n";
    os << "sup_l2_q0_moment," << fmt(st.sup_l2_q0_moment) << "\n";
    os << "grad_A_integral_mean," << fmt(st.grad_A_integral_mean) << "\n";
    os << "grad_A_q0_moment," << fmt(st.grad_A_q0_moment) << "\n";
    os << "bound_violations," << st.bound_violations << "\nnode_steps," << st.node_steps << "\n";
    write_text(res.out_dir / "moments.csv", os.str());
    res.outputs.push_back("moments.csv");
  }
  if (c.ensemble.keep_paths) {
    for (std::size_t p = 0; p < er.paths.size(); ++p) {
      char name[48];
      std::snprintf(name, sizeof name, "paths/path_%04zu", p);
      for (const auto& e : fs::directory_iterator(res.out_dir / name))
        res.outputs.push_back(fs::relative(e.path(), res.out_dir).generic_string());
    }
  }

  char buf[256];
  if (st.failed()) {
    for (const auto& p : er.paths)
      if (p.blowup) {
        res.blowup = p.blowup;
        break;
      }
    std::snprintf(buf, sizeof buf, "ensemble failed: %zu of %zu paths blew up (first: %s)", st.failed_count,
                  st.path_count, res.blowup->message().c_str());
    write_blowup(res.out_dir, buf, res);
    res.summary = buf;
    return res;
  }

  json m = manifest_head("ensemble", options, c.run.seed, to_string(c.run.backend));
  m.update(config_json(store));
  m["run"] = run_json(c.run);
  m["ensemble"] = {{"paths", st.path_count},
                   {"workers", c.ensemble.workers},
                   {"sup_every_step", st.sup_every_step},
                   {"q0", st.q0},
                   {"keep_paths", c.ensemble.keep_paths},
                   {"path_stream", "derive_stream(seed, path)"},
                   {"init_stream", "derive_stream(seed ^ 0x1D1A7C0DE, path)"}};
  m["results"] = {{"failed", st.failed_count},
                  {"sup_l2_sq_mean", st.sup_l2_sq_mean},
                  {"sup_l2_q0_moment", st.sup_l2_q0_moment},
                  {"grad_A_q0_moment", st.grad_A_q0_moment},
                  {"bound_violations", st.bound_violations},
                  {"node_steps", st.node_steps}};
  finish_manifest(m, res.out_dir, res, t0, started);
  std::snprintf(buf, sizeof buf, "ensemble: %zu paths, %zu failed, E[sup ||u||^2] = %.6g", st.path_count,
                st.failed_count, st.sup_l2_sq_mean);
  res.summary = buf;
  return res;
}

}  // namespace

CommandResult galerkin_command(const ConfigStore& config, const CommandOptions& options) {
  const auto t0 = Clock::now();
  const std::string started = utc_now();
  const ConfigStore store = with_overrides(config, options);
  const SimulationConfig c = store.resolve();
  CommandResult res;
  res.out_dir = c.output.dir;

  std::optional<SpectralBasis> basis;
  try {
    basis.emplace(c.grid, c.galerkin.modes_per_axis);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("galerkin.modes: ") + e.what());
  }
  fs::create_directories(res.out_dir);
  GalerkinSystem system(*basis, c.model);
  const double eps = c.galerkin.epsilon.value_or(system.default_epsilon());
  const Field u0 = path_initial_condition(initial_condition(c.grid, c.model), c.model, c.run, 0);
  RngStream stream = derive_stream(c.run.seed, 0);
  const GalerkinTrajectory traj = run_galerkin(initial_state(*basis, u0, eps), system, c.run, c.galerkin, stream);

  {
    std::ofstream series(res.out_dir / "series.csv", std::ios::binary | std::ios::trunc);
    series << series_header() << "\n";
    for (std::size_t k = 0; k < traj.fields.size(); ++k)
      series << series_line(evaluate_row(traj.fields[k], c.model, c.run.nu, traj.times[k], 0)) << "\n";
    res.outputs.push_back("series.csv");
  }
  {
    std::ostringstream os;
    os << "t";
    for (const auto& md : basis->modes()) os << ",c_" << md.kx << "_" << md.ky;
    os << "\n";
    for (const auto& s : traj.states) {
      os << fmt(s.t);
      for (double v : s.c) os << "," << fmt(v);
      os << "\n";
    }
    write_text(res.out_dir / "coefficients.csv", os.str());
    res.outputs.push_back("coefficients.csv");
  }
  SnapshotSink snaps(res.out_dir, c.output.snapshots, c.output.pgm, c.model.ubar);
  for (std::size_t k = 0; k < traj.fields.size(); ++k) {
    DiagnosticsRow row;
    row.t = traj.times[k];
    snaps.record(row, traj.fields[k]);
  }
  add_written(res, res.out_dir, snaps.written());

  if (traj.blowup) {
    res.blowup = traj.blowup;
    write_blowup(res.out_dir, "galerkin " + traj.blowup->message(), res);
    res.summary = "galerkin " + traj.blowup->message();
    return res;
  }

  json m = manifest_head("galerkin", options, c.run.seed, to_string(c.run.backend));
  m.update(config_json(store));
  json modes = json::array();
  for (const auto& md : basis->modes()) modes.push_back({md.kx, md.ky, md.lambda});
  m["basis"] = {{"kind", "neumann_cosine"},
                {"modes_per_axis", basis->modes_per_axis()},
                {"n_modes", basis->size()},
                {"order", "eigenvalue ascending, ties by kx ascending"},
                {"quadrature", "trapezoidal"},
                {"epsilon", traj.epsilon},
                {"dt", traj.dt},
                {"wiener_basis", "one scalar Wiener coordinate per retained eigenmode"},
                {"modes", modes}};
  finish_manifest(m, res.out_dir, res, t0, started);
  char buf[200];
  std::snprintf(buf, sizeof buf, "galerkin: %zu modes, dt %.6g, epsilon %.6g", basis->size(), traj.dt, traj.epsilon);
  res.summary = buf;
  return res;
}

namespace {

json convergence_json(const ConvergenceOptions& o) {
  return {{"mode", o.mode}, {"cells", o.cells}, {"T", o.T}, {"dt_fraction", o.dt_fraction},
          {"paths", o.paths}, {"seed", o.seed}};
}

json figs_json(const FigsOptions& o) {
  return {{"cells", o.cells},         {"paths", o.paths}, {"seed", o.seed},
          {"both_inits", o.both_inits}, {"figures", o.figures}, {"T", o.T},
          {"dt_fraction", o.dt_fraction}, {"perturb_delta", o.perturb_delta}, {"workers", o.workers}};
}

}  // namespace

CommandResult convergence_command(const ConvergenceOptions& conv, const CommandOptions& options) {
  const auto t0 = Clock::now();
  const std::string started = utc_now();
  CommandResult res;
  res.out_dir = options.out_dir.value_or("out");
  json m = manifest_head("convergence", options, conv.seed, "fft");
  m["options"] = convergence_json(conv);
  char buf[256];
  if (conv.mode == "heat") {
    if (conv.cells.empty()) throw ConfigError("convergence: no resolutions given");
    if (!(conv.T > 0.0) || !(conv.dt_fraction > 0.0 && conv.dt_fraction <= 1.0))
      throw ConfigError("convergence: need T > 0 and dt_fraction in (0, 1]");
    for (int cells : conv.cells)
      if (cells < 2) throw ConfigError("convergence: cells must be >= 2");
    fs::create_directories(res.out_dir);
    const auto rows = heat_convergence(conv.cells, conv.T, conv.dt_fraction, heat_spec());
    write_text(res.out_dir / "convergence_heat.csv", heat_convergence_csv(rows));
    res.outputs.push_back("convergence_heat.csv");
    json r = json::array();
    for (const auto& h : rows) r.push_back({{"cells", h.cells}, {"error", h.rel_l2_error}, {"ratio", h.ratio}});
    m["results"] = r;
    std::snprintf(buf, sizeof buf, "heat: finest error %.3e, last ratio %.3f", rows.back().rel_l2_error,
                  rows.back().ratio);
  } else if (conv.mode == "milstein") {
    if (conv.paths < 1) throw ConfigError("convergence: paths must be positive");
    fs::create_directories(res.out_dir);
    ModelSpec spec;
    spec.noise = NoiseKind::Periodic;
    StrongOrderOptions so;
    so.paths = conv.paths;
    so.seed = conv.seed;
    const StrongOrderStudy st = milstein_strong_order(spec, so);
    write_text(res.out_dir / "strong_order.csv", strong_order_csv(st));
    res.outputs.push_back("strong_order.csv");
    m["results"] = {{"milstein_order", st.milstein_order}, {"euler_order", st.euler_order}, {"ref_dt", st.ref_dt}};
    std::snprintf(buf, sizeof buf, "milstein: fitted strong order %.3f (euler %.3f)", st.milstein_order,
                  st.euler_order);
  } else {
    throw ConfigError("convergence: unknown mode '" + conv.mode + "' (expected heat|milstein)");
  }
  finish_manifest(m, res.out_dir, res, t0, started);
  res.summary = buf;
  return res;
}

ConfigStore figure_config(int figure, const FigsOptions& figs, bool symmetrized) {
  if (figure < 1 || figure > 7) throw ConfigError("figs: unknown figure " + std::to_string(figure));
  ConfigStore s;
  s.set("model", "ubar", "4");
  s.set("model", "alpha", "0.4");
  s.set("model", "mu", "0.5");
  s.set("model", "init", symmetrized ? "three_bumps_symmetrized" : "three_bumps");
  s.set("grid", "cells_x", std::to_string(figs.cells));
  s.set("grid", "cells_y", std::to_string(figs.cells));
  s.set("time", "T", fmt(figs.T));
  s.set("time", "dt_fraction", fmt(figs.dt_fraction));
  s.set("noise", "seed", std::to_string(figs.seed));
  s.set("noise", "amplitude", "1.2");
  const char* kind = "zero";
  if (figure == 2 || figure == 4) kind = "prop_shifted";
  if (figure == 3 || figure == 5) kind = "periodic";
  s.set("noise", "kind", kind);
  if (figure == 4 || figure == 5 || figure == 7) s.set("noise", "perturb_delta", fmt(figs.perturb_delta));
  if (figure <= 5) {
    s.set("time", "record_times", fmt(0.0) + "," + fmt(figs.T / 3) + "," + fmt(2 * figs.T / 3) + "," + fmt(figs.T));
  } else {
    std::string rt;
    for (int k = 0; k <= 24; ++k) rt += (k ? "," : "") + fmt(figs.T * k / 24);
    s.set("time", "record_times", rt);
    s.set("ensemble", "paths", std::to_string(figs.paths));
    s.set("ensemble", "workers", std::to_string(figs.workers));
  }
  return s;
}

CommandResult figs_command(const FigsOptions& figs, const CommandOptions& options) {
  const auto t0 = Clock::now();
  const std::string started = utc_now();
  if (figs.cells < 8) throw ConfigError("figs: cells must be >= 8");
  if (figs.paths < 1) throw ConfigError("figs: paths must be positive");
  CommandResult res;
  res.out_dir = options.out_dir.value_or("out");
  fs::create_directories(res.out_dir);
  json m = manifest_head("figs", options, figs.seed, "fft");
  m["options"] = figs_json(figs);
  json figures = json::object();
  std::string summary;

  auto sub = [&](const std::string& name) {
    CommandOptions o = options;
    o.out_dir = (res.out_dir / name).string();
    o.command_line = options.command_line + " [" + name + "]";
    return o;
  };
  auto collect = [&](const std::string& name, const CommandResult& r) {
    for (const auto& f : r.outputs) res.outputs.push_back(name + "/" + f);
    figures[name] = r.summary;
    if (r.blowup && !res.blowup) res.blowup = r.blowup;
  };

  for (int f : figs.figures) {
    if (f < 1 || f > 7) throw ConfigError("figs: unknown figure " + std::to_string(f));
    if (f <= 5) {
      for (bool sym : {false, true}) {
        if (sym && !figs.both_inits) continue;
        const std::string name = "fig" + std::to_string(f) + (sym ? "_symmetrized" : "");
        collect(name, run_command(figure_config(f, figs, sym), sub(name)));
      }
      continue;
    }
    // Mass curves: deterministic vs proportional-shifted vs periodic noise.
    const std::string name = "fig" + std::to_string(f);
    const fs::path dir = res.out_dir / name;
    fs::create_directories(dir);
    std::vector<EnsembleStats> stats;
    std::vector<std::string> names;
    for (const char* kind : {"zero", "prop_shifted", "periodic"}) {
      ConfigStore s = figure_config(f, figs, false);
      s.set("noise", "kind", kind);
      // Without noise and perturbation every path is identical.
      if (std::string_view(kind) == "zero" && f == 6) s.set("ensemble", "paths", "1");
      const std::string tag = std::string_view(kind) == "zero" ? "deterministic" : kind;
      stats.emplace_back();
      collect(name + "/" + tag, ensemble_impl(s, sub(name + "/" + tag), &stats.back()));
      names.push_back(tag);
    }
    std::vector<NamedStats> series;
    for (std::size_t k = 0; k < stats.size(); ++k) series.push_back({names[k], &stats[k]});
    write_text(dir / "mass_curves.csv", mass_curves_csv(series));
    res.outputs.push_back(name + "/mass_curves.csv");
  }
  m["figures"] = figures;
  if (res.blowup) {
    write_blowup(res.out_dir, "figs: " + res.blowup->message(), res);
    res.summary = "figs: " + res.blowup->message();
    return res;
  }
  finish_manifest(m, res.out_dir, res, t0, started);
  res.summary = "figs: wrote " + std::to_string(res.outputs.size()) + " files";
  return res;
}

CommandResult rerun_manifest(const std::string& manifest_path, const CommandOptions& options) {
  json m;
  try {
    m = json::parse(read_text(manifest_path));
  } catch (const json::exception& e) {
    throw ConfigError(manifest_path + ": " + e.what());
  } catch (const std::runtime_error& e) {
    throw ConfigError(e.what());
  }
  if (m.value("format", "") != kManifestFormat) throw ConfigError(manifest_path + ": not a stochagg manifest");
  if (m.value("version", 0) != kManifestVersion) throw ConfigError(manifest_path + ": unsupported manifest version");
  const std::string cmd = m.value("command", "");
  CommandOptions o = options;
  if (o.command_line.empty()) o.command_line = m.value("command_line", cmd);
  try {
    if (cmd == "run" || cmd == "ensemble" || cmd == "galerkin") {
      const ConfigStore store = ConfigStore::parse(m.at("resolved_config_ini").get<std::string>(), manifest_path);
      if (cmd == "run") return run_command(store, o);
      if (cmd == "ensemble") return ensemble_command(store, o);
      return galerkin_command(store, o);
    }
    const json& op = m.at("options");
    if (cmd == "convergence") {
      ConvergenceOptions c;
      c.mode = op.at("mode").get<std::string>();
      c.cells = op.at("cells").get<std::vector<int>>();
      c.T = op.at("T").get<double>();
      c.dt_fraction = op.at("dt_fraction").get<double>();
      c.paths = op.at("paths").get<std::size_t>();
      c.seed = op.at("seed").get<std::uint64_t>();
      return convergence_command(c, o);
    }
    if (cmd == "figs") {
      FigsOptions f;
      f.cells = op.at("cells").get<int>();
      f.paths = op.at("paths").get<std::size_t>();
      f.seed = op.at("seed").get<std::uint64_t>();
      f.both_inits = op.at("both_inits").get<bool>();
      f.figures = op.at("figures").get<std::vector<int>>();
      f.T = op.at("T").get<double>();
      f.dt_fraction = op.at("dt_fraction").get<double>();
      f.perturb_delta = op.at("perturb_delta").get<double>();
      f.workers = op.at("workers").get<unsigned>();
      return figs_command(f, o);
    }
  } catch (const json::exception& e) {
    throw ConfigError(manifest_path + ": " + e.what());
  }
  throw ConfigError(manifest_path + ": unknown command '" + cmd + "'");
}

}  // namespace stochagg
