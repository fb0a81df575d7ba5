/* C interface of the stochagg simulation library. */
#ifndef STOCHAGG_H
#define STOCHAGG_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define SAGG_API __declspec(dllexport)
#else
#define SAGG_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum sagg_status {
  SAGG_OK = 0,
  SAGG_ERR_INTERNAL = 1,
  SAGG_ERR_CONFIG = 2,   /* schema, validation or stability violation */
  SAGG_ERR_BLOWUP = 3,   /* non-finite state; outputs up to the failure are kept */
  SAGG_ERR_IO = 4,
  SAGG_ERR_FORMAT = 5,   /* corrupt or truncated snapshot / manifest */
  SAGG_ERR_ARGUMENT = 6  /* null handle, bad index, buffer misuse */
} sagg_status;

typedef struct sagg_config sagg_config;
typedef struct sagg_field sagg_field;
typedef struct sagg_result sagg_result;

SAGG_API const char* sagg_version(void);
SAGG_API const char* sagg_generator_version(void);
/* Message of the last failed call on this thread; "" after success. */
SAGG_API const char* sagg_last_error(void);
SAGG_API const char* sagg_status_name(sagg_status s);

/* ---- configuration ---- */
SAGG_API sagg_status sagg_config_new(sagg_config** out);
SAGG_API sagg_status sagg_config_load_file(const char* path, sagg_config** out);
SAGG_API sagg_status sagg_config_load_string(const char* text, sagg_config** out);
SAGG_API sagg_status sagg_config_set(sagg_config* cfg, const char* section, const char* key, const char* value);
/* Resolved value (defaults and "auto" filled in). Copies up to cap bytes including
   the terminator; *needed (optional) receives the full length + 1. */
SAGG_API sagg_status sagg_config_get(const sagg_config* cfg, const char* section, const char* key, char* buf,
                                     size_t cap, size_t* needed);
SAGG_API sagg_status sagg_config_validate(const sagg_config* cfg);
SAGG_API sagg_status sagg_config_to_ini(const sagg_config* cfg, char* buf, size_t cap, size_t* needed);
SAGG_API void sagg_config_free(sagg_config* cfg);

/* ---- commands ---- */
typedef struct sagg_run_options {
  const char* command_line; /* recorded in the manifest; may be NULL */
  const char* out_dir;      /* overrides output.dir; may be NULL */
  unsigned workers;         /* overrides ensemble.workers when > 0 */
} sagg_run_options;

typedef struct sagg_convergence_options {
  const char* mode; /* "heat" or "milstein" */
  const int* cells; /* heat resolutions (cells per axis) */
  size_t n_cells;
  double T;
  double dt_fraction;
  size_t paths;
  uint64_t seed;
} sagg_convergence_options;

typedef struct sagg_figs_options {
  int cells;
  size_t paths;
  uint64_t seed;
  int both_inits;
  const int* figures; /* subset of 1..7 */
  size_t n_figures;
  double T;
  double dt_fraction;
  double perturb_delta;
  unsigned workers;
} sagg_figs_options;

SAGG_API void sagg_run_options_init(sagg_run_options* o);
/* Defaults: heat, cells 16/32/64/128, T 1, dt_fraction 0.5, 1000 paths, seed 0. */
SAGG_API void sagg_convergence_options_init(sagg_convergence_options* o);
/* Defaults: 64 cells, 8 paths, seed 0, figures 1..7, T 12, dt_fraction 1, delta 0.1, 1 worker. */
SAGG_API void sagg_figs_options_init(sagg_figs_options* o);

/* Each command writes into the output directory and, on success, finishes with
   manifest.json. On SAGG_ERR_BLOWUP *out is still set. */
SAGG_API sagg_status sagg_run(const sagg_config* cfg, const sagg_run_options* o, sagg_result** out);
SAGG_API sagg_status sagg_ensemble(const sagg_config* cfg, const sagg_run_options* o, sagg_result** out);
SAGG_API sagg_status sagg_galerkin(const sagg_config* cfg, const sagg_run_options* o, sagg_result** out);
SAGG_API sagg_status sagg_convergence(const sagg_convergence_options* c, const sagg_run_options* o,
                                      sagg_result** out);
SAGG_API sagg_status sagg_figs(const sagg_figs_options* f, const sagg_run_options* o, sagg_result** out);
SAGG_API sagg_status sagg_rerun_manifest(const char* manifest_path, const sagg_run_options* o, sagg_result** out);

SAGG_API const char* sagg_result_summary(const sagg_result* r);
SAGG_API const char* sagg_result_out_dir(const sagg_result* r);
SAGG_API size_t sagg_result_output_count(const sagg_result* r);
SAGG_API const char* sagg_result_output(const sagg_result* r, size_t i);
SAGG_API void sagg_result_free(sagg_result* r);

/* ---- fields and snapshots ---- */
SAGG_API sagg_status sagg_field_new(size_t nx, size_t ny, double xmin, double xmax, double ymin, double ymax,
                                    const double* values, sagg_field** out);
/* Initial condition of a configuration (before any perturbation). */
SAGG_API sagg_status sagg_field_initial(const sagg_config* cfg, sagg_field** out);
SAGG_API sagg_status sagg_field_read(const char* path, sagg_field** out, double* t);
SAGG_API sagg_status sagg_field_write(const sagg_field* f, double t, const char* path);
SAGG_API sagg_status sagg_field_write_pgm(const sagg_field* f, double ubar, const char* path);
SAGG_API sagg_status sagg_field_dims(const sagg_field* f, size_t* nx, size_t* ny);
SAGG_API sagg_status sagg_field_bounds(const sagg_field* f, double bounds[4]);
/* nx*ny values, j-major with i contiguous; valid until sagg_field_free. */
SAGG_API const double* sagg_field_data(const sagg_field* f);
SAGG_API void sagg_field_free(sagg_field* f);

#ifdef __cplusplus
}
#endif

#endif
