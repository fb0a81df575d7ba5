#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "stochagg/grid.hpp"
#include "stochagg/model.hpp"
#include "stochagg/stepper.hpp"

namespace stochagg {

// ---- heat oracle ----------------------------------------------------------
// Constant diffusion a0, no reaction, no kernel, no noise, single cosine start.
ModelSpec heat_spec(double a0 = 1.0, int mode_x = 1, int mode_y = 0, double amplitude = 0.1, double offset = 1.0);
// offset + amplitude exp(-a0 lambda t) cos(.)cos(.), the exact Neumann solution.
Field heat_exact(const Grid2D& grid, const ModelSpec& spec, double t);

struct HeatRun {
  int cells = 0;
  double dt = 0.0;
  std::int64_t steps = 0;
  double rel_l2_error = 0.0;
  double ratio = 0.0;  // error(previous cells) / error(this); 0 for the first row
};

// Relative L2 error at time T with dt = dt_fraction x stability bound (aligned to T).
HeatRun heat_mode_error(int cells, double T, double dt_fraction, const ModelSpec& spec, ConvBackend backend);
std::vector<HeatRun> heat_convergence(const std::vector<int>& cells, double T, double dt_fraction,
                                      const ModelSpec& spec, ConvBackend backend = ConvBackend::Fft);
std::string heat_convergence_csv(const std::vector<HeatRun>& rows);

// ---- scalar Milstein reduction --------------------------------------------
// du = f_M(u) dt + sigma(u) dW: the nodewise update with L_h = 0.
double scalar_milstein_step(double u, double dW, double dt, const ModelSpec& spec, double M);
double scalar_euler_step(double u, double dW, double dt, const ModelSpec& spec, double M);

struct StrongOrderRow {
  double dt = 0.0;
  double milstein_error = 0.0;  // E|u_dt(T) - u_ref(T)|
  double euler_error = 0.0;
};

struct StrongOrderStudy {
  std::vector<StrongOrderRow> rows;
  double ref_dt = 0.0;
  double milstein_order = 0.0;  // least-squares slope of log error vs log dt
  double euler_order = 0.0;
  std::size_t paths = 0;
};

struct StrongOrderOptions {
  double T = 1.0;
  double u0 = 1.0;
  int coarsest_exp = 4;  // dt = 2^-4 ...
  int finest_exp = 9;    // ... 2^-9
  int ref_factor = 64;   // reference dt = finest / ref_factor
  std::size_t paths = 1000;
  std::uint64_t seed = 0;
};

// Same Brownian paths at every dt; the reference is Milstein at the fine step.
StrongOrderStudy milstein_strong_order(const ModelSpec& spec, const StrongOrderOptions& options);
std::string strong_order_csv(const StrongOrderStudy& study);

double fit_log_slope(const std::vector<double>& x, const std::vector<double>& y);

// ---- cluster counting -----------------------------------------------------
// 4-connected components of {u >= threshold}.
int count_clusters(const Field& u, double threshold);
// Threshold halfway between min and max.
int count_clusters(const Field& u);

// Relative L2 distance ||a - b|| / ||b|| (nodal sum).
double relative_l2(const Field& a, const Field& b);

}  // namespace stochagg
