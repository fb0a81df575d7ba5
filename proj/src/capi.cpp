#include "stochagg/stochagg.h"

#include <cstring>
#include <exception>
#include <filesystem>
#include <string>

#include "stochagg/config.hpp"
#include "stochagg/driver.hpp"
#include "stochagg/io.hpp"
#include "stochagg/noise.hpp"

struct sagg_config {
  stochagg::ConfigStore store;
};

struct sagg_field {
  stochagg::Field field;
};

struct sagg_result {
  stochagg::CommandResult result;
  std::string out_dir;
};

namespace {

thread_local std::string g_last_error;

sagg_status fail(sagg_status s, std::string msg) {
  g_last_error = std::move(msg);
  return s;
}

sagg_status ok() {
  g_last_error.clear();
  return SAGG_OK;
}

// Maps the active exception to a status code.
sagg_status translate() {
  try {
    throw;
  } catch (const stochagg::ConfigError& e) {
    return fail(SAGG_ERR_CONFIG, e.what());
  } catch (const stochagg::ValidationError& e) {
    return fail(SAGG_ERR_CONFIG, e.what());
  } catch (const stochagg::StabilityError& e) {
    return fail(SAGG_ERR_CONFIG, e.what());
  } catch (const stochagg::BlowUpError& e) {
    return fail(SAGG_ERR_BLOWUP, e.what());
  } catch (const stochagg::FormatError& e) {
    return fail(SAGG_ERR_FORMAT, e.what());
  } catch (const stochagg::GridMismatch& e) {
    return fail(SAGG_ERR_ARGUMENT, e.what());
  } catch (const std::filesystem::filesystem_error& e) {
    return fail(SAGG_ERR_IO, e.what());
  } catch (const std::invalid_argument& e) {
    return fail(SAGG_ERR_ARGUMENT, e.what());
  } catch (const std::domain_error& e) {
    return fail(SAGG_ERR_ARGUMENT, e.what());
  } catch (const std::runtime_error& e) {
    return fail(SAGG_ERR_IO, e.what());
  } catch (const std::exception& e) {
    return fail(SAGG_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(SAGG_ERR_INTERNAL, "unknown error");
  }
}

sagg_status copy_out(const std::string& s, char* buf, size_t cap, size_t* needed) {
  if (needed) *needed = s.size() + 1;
  if (buf && cap > 0) {
    const size_t n = std::min(cap - 1, s.size());
    std::memcpy(buf, s.data(), n);
    buf[n] = '\0';
  }
  if (buf && cap < s.size() + 1) return fail(SAGG_ERR_ARGUMENT, "buffer too small");
  return ok();
}

stochagg::CommandOptions command_options(const sagg_run_options* o) {
  stochagg::CommandOptions c;
  if (!o) return c;
  if (o->command_line) c.command_line = o->command_line;
  if (o->out_dir) c.out_dir = std::string(o->out_dir);
  if (o->workers > 0) c.workers = o->workers;
  return c;
}

template <typename F>
sagg_status run_with_result(sagg_result** out, F&& f) {
  if (!out) return fail(SAGG_ERR_ARGUMENT, "null result pointer");
  *out = nullptr;
  try {
    auto* r = new sagg_result{f(), {}};
    r->out_dir = r->result.out_dir.string();
    *out = r;
    if (r->result.blowup) return fail(SAGG_ERR_BLOWUP, r->result.summary);
    return ok();
  } catch (...) {
    return translate();
  }
}

}  // namespace

extern "C" {

const char* sagg_version(void) {
  static const std::string v(stochagg::code_version());
  return v.c_str();
}

const char* sagg_generator_version(void) { return stochagg::kGeneratorVersion; }

const char* sagg_last_error(void) { return g_last_error.c_str(); }

const char* sagg_status_name(sagg_status s) {
  switch (s) {
    case SAGG_OK: return "ok";
    case SAGG_ERR_INTERNAL: return "internal error";
    case SAGG_ERR_CONFIG: return "configuration error";
    case SAGG_ERR_BLOWUP: return "blow-up";
    case SAGG_ERR_IO: return "i/o error";
    case SAGG_ERR_FORMAT: return "format error";
    case SAGG_ERR_ARGUMENT: return "invalid argument";
  }
  return "unknown status";
}

sagg_status sagg_config_new(sagg_config** out) {
  if (!out) return fail(SAGG_ERR_ARGUMENT, "null output pointer");
  *out = new sagg_config{};
  return ok();
}

sagg_status sagg_config_load_file(const char* path, sagg_config** out) {
  if (!path || !out) return fail(SAGG_ERR_ARGUMENT, "null argument");
  *out = nullptr;
  try {
    *out = new sagg_config{stochagg::ConfigStore::load(path)};
    return ok();
  } catch (...) {
    return translate();
  }
}

sagg_status sagg_config_load_string(const char* text, sagg_config** out) {
  if (!text || !out) return fail(SAGG_ERR_ARGUMENT, "null argument");
  *out = nullptr;
  try {
    *out = new sagg_config{stochagg::ConfigStore::parse(text)};
    return ok();
  } catch (...) {
    return translate();
  }
}

sagg_status sagg_config_set(sagg_config* cfg, const char* section, const char* key, const char* value) {
  if (!cfg || !section || !key || !value) return fail(SAGG_ERR_ARGUMENT, "null argument");
  try {
    cfg->store.set(section, key, value);
    return ok();
  } catch (...) {
    return translate();
  }
}

sagg_status sagg_config_get(const sagg_config* cfg, const char* section, const char* key, char* buf, size_t cap,
                            size_t* needed) {
  if (!cfg || !section || !key) return fail(SAGG_ERR_ARGUMENT, "null argument");
  try {
    const auto values = cfg->store.resolved_values();
    const auto it = values.find(std::string(section) + "." + key);
    if (it == values.end()) return fail(SAGG_ERR_CONFIG, std::string("unknown key ") + section + "." + key);
    return copy_out(it->second, buf, cap, needed);
  } catch (...) {
    return translate();
  }
}

sagg_status sagg_config_validate(const sagg_config* cfg) {
  if (!cfg) return fail(SAGG_ERR_ARGUMENT, "null config");
  try {
    cfg->store.resolve();
    return ok();
  } catch (...) {
    return translate();
  }
}

sagg_status sagg_config_to_ini(const sagg_config* cfg, char* buf, size_t cap, size_t* needed) {
  if (!cfg) return fail(SAGG_ERR_ARGUMENT, "null config");
  try {
    return copy_out(cfg->store.to_ini(), buf, cap, needed);
  } catch (...) {
    return translate();
  }
}

void sagg_config_free(sagg_config* cfg) { delete cfg; }

void sagg_run_options_init(sagg_run_options* o) {
  if (o) *o = sagg_run_options{nullptr, nullptr, 0};
}

void sagg_convergence_options_init(sagg_convergence_options* o) {
  static const int kCells[] = {16, 32, 64, 128};
  if (o) *o = sagg_convergence_options{"heat", kCells, 4, 1.0, 0.5, 1000, 0};
}

void sagg_figs_options_init(sagg_figs_options* o) {
  static const int kFigures[] = {1, 2, 3, 4, 5, 6, 7};
  if (o) *o = sagg_figs_options{64, 8, 0, 0, kFigures, 7, 12.0, 1.0, 0.1, 1};
}

sagg_status sagg_run(const sagg_config* cfg, const sagg_run_options* o, sagg_result** out) {
  if (!cfg) return fail(SAGG_ERR_ARGUMENT, "null config");
  return run_with_result(out, [&] { return stochagg::run_command(cfg->store, command_options(o)); });
}

sagg_status sagg_ensemble(const sagg_config* cfg, const sagg_run_options* o, sagg_result** out) {
  if (!cfg) return fail(SAGG_ERR_ARGUMENT, "null config");
  return run_with_result(out, [&] { return stochagg::ensemble_command(cfg->store, command_options(o)); });
}

sagg_status sagg_galerkin(const sagg_config* cfg, const sagg_run_options* o, sagg_result** out) {
  if (!cfg) return fail(SAGG_ERR_ARGUMENT, "null config");
  return run_with_result(out, [&] { return stochagg::galerkin_command(cfg->store, command_options(o)); });
}

sagg_status sagg_convergence(const sagg_convergence_options* c, const sagg_run_options* o, sagg_result** out) {
  if (!c || !c->mode || (c->n_cells > 0 && !c->cells)) return fail(SAGG_ERR_ARGUMENT, "null argument");
  stochagg::ConvergenceOptions conv;
  conv.mode = c->mode;
  conv.cells.assign(c->cells, c->cells + c->n_cells);
  conv.T = c->T;
  conv.dt_fraction = c->dt_fraction;
  conv.paths = c->paths;
  conv.seed = c->seed;
  return run_with_result(out, [&] { return stochagg::convergence_command(conv, command_options(o)); });
}

sagg_status sagg_figs(const sagg_figs_options* f, const sagg_run_options* o, sagg_result** out) {
  if (!f || (f->n_figures > 0 && !f->figures)) return fail(SAGG_ERR_ARGUMENT, "null argument");
  stochagg::FigsOptions figs;
  figs.cells = f->cells;
  figs.paths = f->paths;
  figs.seed = f->seed;
  figs.both_inits = f->both_inits != 0;
  figs.figures.assign(f->figures, f->figures + f->n_figures);
  figs.T = f->T;
  figs.dt_fraction = f->dt_fraction;
  figs.perturb_delta = f->perturb_delta;
  figs.workers = f->workers > 0 ? f->workers : 1;
  return run_with_result(out, [&] { return stochagg::figs_command(figs, command_options(o)); });
}

sagg_status sagg_rerun_manifest(const char* manifest_path, const sagg_run_options* o, sagg_result** out) {
  if (!manifest_path) return fail(SAGG_ERR_ARGUMENT, "null manifest path");
  return run_with_result(out, [&] { return stochagg::rerun_manifest(manifest_path, command_options(o)); });
}

const char* sagg_result_summary(const sagg_result* r) { return r ? r->result.summary.c_str() : ""; }

const char* sagg_result_out_dir(const sagg_result* r) { return r ? r->out_dir.c_str() : ""; }

size_t sagg_result_output_count(const sagg_result* r) { return r ? r->result.outputs.size() : 0; }

const char* sagg_result_output(const sagg_result* r, size_t i) {
  if (!r || i >= r->result.outputs.size()) return nullptr;
  return r->result.outputs[i].c_str();
}

void sagg_result_free(sagg_result* r) { delete r; }

sagg_status sagg_field_new(size_t nx, size_t ny, double xmin, double xmax, double ymin, double ymax,
                           const double* values, sagg_field** out) {
  if (!out) return fail(SAGG_ERR_ARGUMENT, "null output pointer");
  *out = nullptr;
  try {
    const stochagg::Grid2D g(static_cast<int>(nx), static_cast<int>(ny), xmin, xmax, ymin, ymax);
    stochagg::Field f(g);
    if (values) std::copy(values, values + g.size(), f.values().begin());
    *out = new sagg_field{std::move(f)};
    return ok();
  } catch (...) {
    return translate();
  }
}

sagg_status sagg_field_initial(const sagg_config* cfg, sagg_field** out) {
  if (!cfg || !out) return fail(SAGG_ERR_ARGUMENT, "null argument");
  *out = nullptr;
  try {
    const stochagg::SimulationConfig c = cfg->store.resolve();
    *out = new sagg_field{stochagg::initial_condition(c.grid, c.model)};
    return ok();
  } catch (...) {
    return translate();
  }
}

sagg_status sagg_field_read(const char* path, sagg_field** out, double* t) {
  if (!path || !out) return fail(SAGG_ERR_ARGUMENT, "null argument");
  *out = nullptr;
  try {
    stochagg::Snapshot s = stochagg::read_snapshot(path);
    if (t) *t = s.t;
    *out = new sagg_field{std::move(s.field)};
    return ok();
  } catch (...) {
    return translate();
  }
}

sagg_status sagg_field_write(const sagg_field* f, double t, const char* path) {
  if (!f || !path) return fail(SAGG_ERR_ARGUMENT, "null argument");
  try {
    stochagg::write_snapshot(f->field, t, path);
    return ok();
  } catch (...) {
    return translate();
  }
}

sagg_status sagg_field_write_pgm(const sagg_field* f, double ubar, const char* path) {
  if (!f || !path) return fail(SAGG_ERR_ARGUMENT, "null argument");
  if (!(ubar > 0.0)) return fail(SAGG_ERR_ARGUMENT, "ubar must be positive");
  try {
    stochagg::write_pgm(f->field, ubar, path);
    return ok();
  } catch (...) {
    return translate();
  }
}

sagg_status sagg_field_dims(const sagg_field* f, size_t* nx, size_t* ny) {
  if (!f) return fail(SAGG_ERR_ARGUMENT, "null field");
  if (nx) *nx = static_cast<size_t>(f->field.grid().nx);
  if (ny) *ny = static_cast<size_t>(f->field.grid().ny);
  return ok();
}

sagg_status sagg_field_bounds(const sagg_field* f, double bounds[4]) {
  if (!f || !bounds) return fail(SAGG_ERR_ARGUMENT, "null argument");
  const auto& g = f->field.grid();
  bounds[0] = g.xmin;
  bounds[1] = g.xmax;
  bounds[2] = g.ymin;
  bounds[3] = g.ymax;
  return ok();
}

const double* sagg_field_data(const sagg_field* f) { return f ? f->field.values().data() : nullptr; }

void sagg_field_free(sagg_field* f) { delete f; }

}  // extern "C"
