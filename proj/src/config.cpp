#include "stochagg/config.hpp"

#include <algorithm>
#include <cerrno>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include "stochagg/io.hpp"

namespace stochagg {

namespace {

std::string fmt_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string_view trim(std::string_view s) {
  const auto ws = " \t\r\n";
  const auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  return s.substr(b, s.find_last_not_of(ws) - b + 1);
}

std::string full_key(std::string_view section, std::string_view key) {
  return std::string(section) + "." + std::string(key);
}

const ConfigKey* find_key(std::string_view section, std::string_view key) {
  for (const auto& k : config_schema())
    if (k.section == section && k.key == key) return &k;
  return nullptr;
}

bool known_section(std::string_view section) {
  for (const auto& k : config_schema())
    if (k.section == section) return true;
  return false;
}

// Typed accessors over the merged (user + default) view.
class Reader {
 public:
  explicit Reader(const ConfigStore& store) : store_(store) {}

  std::string raw(std::string_view section, std::string_view key) const {
    if (auto v = store_.get(section, key)) return *v;
    const ConfigKey* k = find_key(section, key);
    if (!k) throw ConfigError("internal: unknown key " + full_key(section, key));
    if (k->required) throw ConfigError("missing required key " + full_key(section, key));
    return std::string(k->default_value);
  }

  bool is_auto(std::string_view section, std::string_view key) const { return raw(section, key) == "auto"; }

  double real(std::string_view section, std::string_view key) const {
    const std::string s = raw(section, key);
    errno = 0;
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (s.empty() || *end != '\0' || errno == ERANGE || !std::isfinite(v))
      throw ConfigError(full_key(section, key) + ": expected a finite number, got '" + s + "'");
    return v;
  }

  long long integer(std::string_view section, std::string_view key) const {
    const std::string s = raw(section, key);
    long long v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size())
      throw ConfigError(full_key(section, key) + ": expected an integer, got '" + s + "'");
    return v;
  }

  std::uint64_t unsigned64(std::string_view section, std::string_view key) const {
    const std::string s = raw(section, key);
    std::uint64_t v = 0;
    int base = 10;
    std::string_view digits = s;
    if (digits.size() > 2 && digits[0] == '0' && (digits[1] == 'x' || digits[1] == 'X')) {
      base = 16;
      digits.remove_prefix(2);
    }
    auto [p, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), v, base);
    if (ec != std::errc() || p != digits.data() + digits.size())
      throw ConfigError(full_key(section, key) + ": expected an unsigned 64-bit integer, got '" + s + "'");
    return v;
  }

  bool boolean(std::string_view section, std::string_view key) const {
    const std::string s = raw(section, key);
    if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
    if (s == "false" || s == "0" || s == "no" || s == "off") return false;
    throw ConfigError(full_key(section, key) + ": expected true/false, got '" + s + "'");
  }

  std::vector<double> reals(std::string_view section, std::string_view key) const {
    const std::string s = raw(section, key);
    std::vector<double> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
      const std::string t(trim(item));
      char* end = nullptr;
      const double v = std::strtod(t.c_str(), &end);
      if (t.empty() || *end != '\0' || !std::isfinite(v))
        throw ConfigError(full_key(section, key) + ": bad list entry '" + t + "'");
      out.push_back(v);
    }
    return out;
  }

  template <typename E>
  E choice(std::string_view section, std::string_view key, std::optional<E> (*parse)(std::string_view),
           std::string_view allowed) const {
    const std::string s = raw(section, key);
    if (auto e = parse(s)) return *e;
    throw ConfigError(full_key(section, key) + ": unknown value '" + s + "' (expected " + std::string(allowed) + ")");
  }

 private:
  const ConfigStore& store_;
};

}  // namespace

const std::vector<ConfigKey>& config_schema() {
  static const std::vector<ConfigKey> schema = {
      {"model", "alpha", "0.4", "linear growth rate in f(u) = alpha u - mu u^2"},
      {"model", "mu", "0.5", "quadratic damping in f"},
      {"model", "ubar", "", "upper density bound", true},
      {"model", "trunc_M", "auto", "reaction truncation level; auto = 2 max(ubar, max|f|)"},
      {"model", "diffusion", "degenerate_logistic", "degenerate_logistic | constant"},
      {"model", "a0", "1", "diffusion constant for diffusion = constant"},
      {"model", "kernel", "gaussian_normalized", "gaussian_normalized | disabled"},
      {"model", "kernel_normalization", "analytic", "analytic | discrete_sum"},
      {"model", "kernel_cutoff", "0", "zero kernel samples beyond this radius; 0 = none"},
      {"model", "init", "three_bumps",
       "three_bumps | three_bumps_symmetrized | single_cosine | constant | custom_table"},
      {"model", "init_mode_x", "1", "single_cosine mode along x"},
      {"model", "init_mode_y", "0", "single_cosine mode along y"},
      {"model", "init_amplitude", "0.1", "single_cosine amplitude"},
      {"model", "init_offset", "1", "single_cosine offset"},
      {"model", "init_value", "1", "constant initial value"},
      {"model", "init_table", "", "snapshot file for custom_table"},
      {"grid", "cells_x", "64", "cells along x (nodes = cells + 1)"},
      {"grid", "cells_y", "64", "cells along y"},
      {"grid", "xmin", "-4", ""},
      {"grid", "xmax", "4", ""},
      {"grid", "ymin", "-4", ""},
      {"grid", "ymax", "4", ""},
      {"grid", "convolution", "fft", "fft | direct"},
      {"time", "T", "12", "horizon"},
      {"time", "dt", "auto", "step; auto = dt_fraction x stability bound, aligned to record times"},
      {"time", "dt_fraction", "0.5", "fraction of the stability bound used by dt = auto"},
      {"time", "record_times", "0,4,8,12", "comma-separated output times"},
      {"time", "stability", "strict", "strict | warn"},
      {"time", "clip", "off", "off | clip_to_bounds"},
      {"noise", "kind", "zero", "zero | prop_shifted | periodic"},
      {"noise", "amplitude", "1.2", "noise amplitude"},
      {"noise", "seed", "0", "64-bit master seed"},
      {"noise", "white_noise_scaling", "false", "scale increments by 1/sqrt(dx dy)"},
      {"noise", "perturb_delta", "0", "relative initial perturbation per path"},
      {"noise", "perturb_margin", "0.001", "perturbed values are clamped to [0, ubar - margin]"},
      {"output", "dir", "out", "output directory"},
      {"output", "snapshots", "true", "write binary snapshots at record times"},
      {"output", "pgm", "true", "write PGM heatmaps at record times"},
      {"output", "nu", "0.001", "Stampacchia regularization"},
      {"output", "bound_tol", "1e-6", "tolerance of the [0, ubar] bound monitor"},
      {"galerkin", "modes", "16", "modes per axis"},
      {"galerkin", "epsilon", "auto", "diffusion regularization; auto = 1 / number of modes"},
      {"galerkin", "dt", "auto", "step; auto = time.dt refined below the spectral limit"},
      {"ensemble", "paths", "8", "number of paths"},
      {"ensemble", "workers", "1", "worker threads"},
      {"ensemble", "q0", "5", "moment exponent"},
      {"ensemble", "sup_every_step", "false", "sup over every step instead of record times"},
      {"ensemble", "keep_paths", "false", "write per-path outputs"},
  };
  return schema;
}

ConfigStore ConfigStore::parse(std::string_view text, std::string_view origin) {
  ConfigStore store;
  std::string section;
  std::map<std::string, int> seen_at;
  int lineno = 0;
  std::size_t pos = 0;
  auto fail = [&](const std::string& msg) -> ConfigError {
    return ConfigError(std::string(origin) + ":" + std::to_string(lineno) + ": " + msg);
  };
  while (pos <= text.size()) {
    const std::size_t nl = text.find('\n', pos);
    std::string_view line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++lineno;
    if (const auto c = line.find_first_of("#;"); c != std::string_view::npos) line = line.substr(0, c);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw fail("malformed section header");
      section = std::string(trim(line.substr(1, line.size() - 2)));
      if (!known_section(section)) throw fail("unknown section [" + section + "]");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw fail("expected key = value");
    const std::string key(trim(line.substr(0, eq)));
    const std::string value(trim(line.substr(eq + 1)));
    if (section.empty()) throw fail("key '" + key + "' outside of a section");
    if (key.empty()) throw fail("empty key");
    if (!find_key(section, key)) throw fail("unknown key '" + key + "' in [" + section + "]");
    const std::string fk = full_key(section, key);
    if (auto it = seen_at.find(fk); it != seen_at.end())
      throw fail("duplicate key '" + fk + "' (first set on line " + std::to_string(it->second) + ")");
    seen_at[fk] = lineno;
    store.values_[fk] = value;
  }
  return store;
}

ConfigStore ConfigStore::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config file " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  ConfigStore store = parse(ss.str(), path);
  store.base_dir_ = std::filesystem::path(path).parent_path().string();
  return store;
}

void ConfigStore::set(std::string_view section, std::string_view key, std::string value) {
  if (!find_key(section, key)) throw ConfigError("unknown key " + full_key(section, key));
  values_[full_key(section, key)] = std::move(value);
}

std::optional<std::string> ConfigStore::get(std::string_view section, std::string_view key) const {
  auto it = values_.find(full_key(section, key));
  if (it == values_.end()) return std::nullopt;
  return it->second;
}

bool ConfigStore::user_set(std::string_view section, std::string_view key) const {
  return values_.count(full_key(section, key)) > 0;
}

double aligned_dt(double T, double dt_target, const std::vector<double>& record_times) {
  if (!(T > 0.0) || !(dt_target > 0.0)) throw std::invalid_argument("aligned_dt: T and dt must be positive");
  const double n0 = std::ceil(T / dt_target - 1e-9);
  const auto start = static_cast<std::int64_t>(std::max(1.0, n0));
  for (std::int64_t n = start; n < start + 100000; ++n) {
    bool ok = true;
    for (double t : record_times) {
      const double k = t / T * static_cast<double>(n);
      if (std::abs(k - std::round(k)) > 1e-9 * std::max(1.0, k)) {
        ok = false;
        break;
      }
    }
    if (ok) return T / static_cast<double>(n);
  }
  throw std::invalid_argument("aligned_dt: record times are not commensurate with T");
}

SimulationConfig ConfigStore::resolve() const {
  Reader r(*this);
  SimulationConfig c;

  const long long cx = r.integer("grid", "cells_x"), cy = r.integer("grid", "cells_y");
  if (cx < 2 || cy < 2 || cx > 1 << 16 || cy > 1 << 16) throw ConfigError("grid.cells_x/cells_y must be in [2, 65536]");
  try {
    c.grid = Grid2D(static_cast<int>(cx) + 1, static_cast<int>(cy) + 1, r.real("grid", "xmin"), r.real("grid", "xmax"),
                    r.real("grid", "ymin"), r.real("grid", "ymax"));
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("grid: ") + e.what());
  }

  ModelSpec& m = c.model;
  m.alpha = r.real("model", "alpha");
  m.mu = r.real("model", "mu");
  m.ubar = r.real("model", "ubar");
  if (!r.is_auto("model", "trunc_M")) m.trunc_M = r.real("model", "trunc_M");
  m.diffusion = r.choice("model", "diffusion", parse_diffusion_kind, "degenerate_logistic|constant");
  m.diffusion_a0 = r.real("model", "a0");
  m.kernel = r.choice("model", "kernel", parse_kernel_kind, "gaussian_normalized|disabled");
  m.kernel_normalization =
      r.choice("model", "kernel_normalization", parse_kernel_normalization, "analytic|discrete_sum");
  m.kernel_cutoff = r.real("model", "kernel_cutoff");
  if (m.kernel_cutoff < 0.0) throw ConfigError("model.kernel_cutoff must be nonnegative");
  m.noise = r.choice("noise", "kind", parse_noise_kind, "zero|prop_shifted|periodic");
  m.noise_amplitude = r.real("noise", "amplitude");

  InitSpec& init = m.init;
  init.kind = r.choice("model", "init", parse_init_kind,
                       "three_bumps|three_bumps_symmetrized|single_cosine|constant|custom_table");
  init.mode_x = static_cast<int>(r.integer("model", "init_mode_x"));
  init.mode_y = static_cast<int>(r.integer("model", "init_mode_y"));
  if (init.mode_x < 0 || init.mode_y < 0) throw ConfigError("model.init_mode_x/init_mode_y must be nonnegative");
  init.amplitude = r.real("model", "init_amplitude");
  init.offset = r.real("model", "init_offset");
  init.value = r.real("model", "init_value");
  if (init.kind == InitKind::CustomTable) {
    init.table_path = r.raw("model", "init_table");
    if (init.table_path.empty()) throw ConfigError("model.init_table is required for init = custom_table");
    std::filesystem::path p(init.table_path);
    if (p.is_relative() && !base_dir_.empty()) p = std::filesystem::path(base_dir_) / p;
    try {
      Snapshot s = read_snapshot(p);
      if (!(s.field.grid() == c.grid)) throw ConfigError("model.init_table: snapshot grid does not match [grid]");
      init.table = std::move(s.field);
    } catch (const FormatError& e) {
      throw ConfigError(std::string("model.init_table: ") + e.what());
    } catch (const std::domain_error& e) {
      throw ConfigError(std::string("model.init_table: ") + e.what());
    }
  }

  try {
    m = validate(m, c.grid);
  } catch (const ValidationError& e) {
    throw ConfigError(std::string("model: ") + e.what());
  }

  RunConfig& run = c.run;
  run.T = r.real("time", "T");
  run.record_times = r.reals("time", "record_times");
  run.stability = r.choice("time", "stability", parse_stability_mode, "strict|warn");
  run.clip = r.choice("time", "clip", parse_clip_mode, "off|clip_to_bounds");
  run.backend = r.choice("grid", "convolution", parse_conv_backend, "fft|direct");
  run.seed = r.unsigned64("noise", "seed");
  run.white_noise_scaling = r.boolean("noise", "white_noise_scaling");
  run.perturb_delta = r.real("noise", "perturb_delta");
  run.perturb_margin = r.real("noise", "perturb_margin");
  if (run.perturb_delta < 0.0) throw ConfigError("noise.perturb_delta must be nonnegative");
  run.nu = r.real("output", "nu");
  run.bound_tol = r.real("output", "bound_tol");
  if (!(run.T > 0.0)) throw ConfigError("time.T must be positive");
  if (r.is_auto("time", "dt")) {
    const double frac = r.real("time", "dt_fraction");
    if (!(frac > 0.0 && frac <= 1.0)) throw ConfigError("time.dt_fraction must be in (0, 1]");
    const double bound = stability_bound(m, c.grid);
    const double target = std::isfinite(bound) ? frac * bound : run.T / 1000.0;
    try {
      run.dt = aligned_dt(run.T, std::min(target, run.T), run.record_times);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("time.dt: ") + e.what());
    }
  } else {
    run.dt = r.real("time", "dt");
  }
  try {
    run.check();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("time: ") + e.what());
  }

  c.galerkin.modes_per_axis = static_cast<int>(r.integer("galerkin", "modes"));
  if (c.galerkin.modes_per_axis < 1) throw ConfigError("galerkin.modes must be positive");
  if (!r.is_auto("galerkin", "epsilon")) {
    c.galerkin.epsilon = r.real("galerkin", "epsilon");
    if (!(*c.galerkin.epsilon >= 0.0)) throw ConfigError("galerkin.epsilon must be nonnegative");
  }
  if (!r.is_auto("galerkin", "dt")) {
    c.galerkin.dt = r.real("galerkin", "dt");
    if (!(*c.galerkin.dt > 0.0)) throw ConfigError("galerkin.dt must be positive");
  }

  const long long paths = r.integer("ensemble", "paths");
  const long long workers = r.integer("ensemble", "workers");
  if (paths < 1) throw ConfigError("ensemble.paths must be positive");
  if (workers < 1 || workers > 1024) throw ConfigError("ensemble.workers must be in [1, 1024]");
  c.ensemble.paths = static_cast<std::size_t>(paths);
  c.ensemble.workers = static_cast<unsigned>(workers);
  c.ensemble.q0 = static_cast<int>(r.integer("ensemble", "q0"));
  if (c.ensemble.q0 < 1) throw ConfigError("ensemble.q0 must be positive");
  c.ensemble.sup_every_step = r.boolean("ensemble", "sup_every_step");
  c.ensemble.keep_paths = r.boolean("ensemble", "keep_paths");

  c.output.dir = r.raw("output", "dir");
  if (c.output.dir.empty()) throw ConfigError("output.dir must not be empty");
  c.output.snapshots = r.boolean("output", "snapshots");
  c.output.pgm = r.boolean("output", "pgm");
  return c;
}

std::map<std::string, std::string> ConfigStore::resolved_values() const {
  const SimulationConfig c = resolve();
  Reader r(*this);
  std::map<std::string, std::string> out;
  for (const auto& k : config_schema()) out[full_key(k.section, k.key)] = r.raw(k.section, k.key);
  out["model.trunc_M"] = fmt_double(c.model.resolved_trunc_M());
  out["time.dt"] = fmt_double(c.run.dt);
  if (auto& t = out["model.init_table"]; !t.empty() && !base_dir_.empty() && std::filesystem::path(t).is_relative())
    t = std::filesystem::absolute(std::filesystem::path(base_dir_) / t).lexically_normal().string();
  return out;
}

std::string ConfigStore::to_ini() const {
  const auto values = resolved_values();
  std::string s;
  std::string_view section;
  for (const auto& k : config_schema()) {
    if (k.section != section) {
      if (!section.empty()) s += "\n";
      section = k.section;
      s += "[" + std::string(section) + "]\n";
    }
    s += std::string(k.key) + " = " + values.at(full_key(k.section, k.key)) + "\n";
  }
  return s;
}

}  // namespace stochagg
