#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "stochagg/convolution.hpp"
#include "stochagg/diagnostics.hpp"
#include "stochagg/grid.hpp"
#include "stochagg/model.hpp"
#include "stochagg/noise.hpp"

namespace stochagg {

enum class StabilityMode { Strict, Warn };
enum class ClipMode { Off, ClipToBounds };
std::string_view to_string(StabilityMode m);
std::string_view to_string(ClipMode m);
std::optional<StabilityMode> parse_stability_mode(std::string_view s);
std::optional<ClipMode> parse_clip_mode(std::string_view s);

inline constexpr double kStabilitySafety = 0.9;

struct RunConfig {
  double T = 12.0;
  double dt = 1e-3;
  std::vector<double> record_times{0.0, 4.0, 8.0, 12.0};
  std::uint64_t seed = 0;
  ConvBackend backend = ConvBackend::Fft;
  StabilityMode stability = StabilityMode::Strict;
  ClipMode clip = ClipMode::Off;
  // Multiplies increments by 1/sqrt(dx dy).
  bool white_noise_scaling = false;
  double nu = kDefaultNu;
  double bound_tol = 1e-6;
  double perturb_delta = 0.0;
  double perturb_margin = 1e-3;

  // N_T = round(T / dt).
  std::int64_t num_steps() const;
  // Step index for each record time.
  std::vector<std::int64_t> record_steps() const;
  // Throws std::invalid_argument on a broken invariant.
  void check() const;
};

// x faces: (nx+1) per row, face f sits between nodes f-1 and f; faces 0 and nx are the boundary.
// y faces: (ny+1) rows of nx, same convention along y.
struct FluxPair {
  Grid2D grid;
  std::vector<double> fx;
  std::vector<double> fy;

  explicit FluxPair(const Grid2D& g = Grid2D{})
      : grid(g), fx(static_cast<std::size_t>(g.nx + 1) * g.ny, 0.0), fy(static_cast<std::size_t>(g.ny + 1) * g.nx, 0.0) {}
  double& x_face(int f, int j) { return fx[static_cast<std::size_t>(j) * (grid.nx + 1) + f]; }
  double x_face(int f, int j) const { return fx[static_cast<std::size_t>(j) * (grid.nx + 1) + f]; }
  double& y_face(int i, int g) { return fy[static_cast<std::size_t>(g) * grid.nx + i]; }
  double y_face(int i, int g) const { return fy[static_cast<std::size_t>(g) * grid.nx + i]; }
};

FluxPair compute_fluxes(const Field& u, const Field& v, const ModelSpec& spec);
void compute_fluxes(const Field& u, const Field& v, const ModelSpec& spec, FluxPair& out);
Field divergence(const FluxPair& fluxes);

struct StabilityCheck {
  enum class Status { Ok, Warning, Error };
  Status status = Status::Ok;
  double dt_max = 0.0;  // +inf when no parabolic restriction applies
  std::string message;
};

// dt <= 0.9 * min(dx,dy)^2 / (2 d max_[0,ubar] a), d = 2.
double stability_bound(const ModelSpec& spec, const Grid2D& grid);
StabilityCheck check_stability(const ModelSpec& spec, const Grid2D& grid, const RunConfig& config);

class StabilityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct BlowUpReport {
  std::int64_t step = -1;
  double t = 0.0;
  int i = -1;
  int j = -1;
  double value = 0.0;
  std::string message() const;
};

class BlowUpError : public std::runtime_error {
 public:
  explicit BlowUpError(BlowUpReport r) : std::runtime_error(r.message()), report(r) {}
  BlowUpReport report;
};

// Explicit one-step update with reusable workspace. One instance per path.
class Stepper {
 public:
  Stepper(const ModelSpec& spec, const Grid2D& grid, const RunConfig& config);

  // u <- u + dt [L_h(u) + f_M(u)] + sigma(u) dW + 1/2 sigma sigma'(u) (dW^2 - dt).
  // Returns the number of clamped nodes. On non-finite output throws BlowUpError (step -1)
  // and leaves u unchanged.
  std::uint64_t step(Field& u, const Field& dW);

  const Field& convolution() const { return v_; }
  const ModelSpec& spec() const { return spec_; }
  double dt() const { return dt_; }

 private:
  ModelSpec spec_;
  Grid2D grid_;
  double dt_;
  double noise_scale_;
  double M_;
  ClipMode clip_;
  Convolver conv_;
  Field v_;
  Field next_;
  FluxPair flux_;
  std::vector<double> a_;
};

Field milstein_step(const Field& u, const Field& dW, const ModelSpec& spec, const RunConfig& config);

// Receives each record as it is produced.
class PathSink {
 public:
  virtual ~PathSink() = default;
  virtual void record(const DiagnosticsRow& row, const Field& u) = 0;
  virtual void flush() {}
};

struct PathResult {
  Field final_field;
  double final_time = 0.0;
  // One entry per completed step, index 0 is t = 0.
  std::vector<double> times;
  std::vector<double> mass;
  std::vector<double> min_u;
  std::vector<double> max_u;
  std::vector<DiagnosticsRow> records;
  std::optional<BlowUpReport> blowup;
  std::uint64_t clamp_total = 0;
  BoundViolationSummary bounds;
  double sup_l2_sq_records = 0.0;
  double sup_l2_sq_steps = 0.0;
  // Left Riemann sum of ||grad A(u)||^2 over [0, T].
  double grad_A_time_integral = 0.0;

  bool ok() const { return !blowup.has_value(); }
};

// Runs N_T steps from u0. Increments come from `stream` in Field order, one field per step.
// Strict stability mode throws StabilityError before stepping.
PathResult run_path(const Field& u0, const ModelSpec& spec, const RunConfig& config, RngStream& stream,
                    const std::vector<PathSink*>& sinks = {});

}  // namespace stochagg
