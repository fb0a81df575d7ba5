#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "stochagg/grid.hpp"
#include "stochagg/noise.hpp"

namespace stochagg {

enum class DiffusionKind { DegenerateLogistic, Constant };
enum class NoiseKind { Zero, PropShifted, Periodic };
enum class KernelKind { GaussianNormalized, Disabled };
enum class KernelNormalization { Analytic, DiscreteSum };
enum class InitKind { ThreeBumps, ThreeBumpsSymmetrized, SingleCosine, Constant, CustomTable };

// Canonical config strings.
std::string_view to_string(DiffusionKind k);
std::string_view to_string(NoiseKind k);
std::string_view to_string(KernelKind k);
std::string_view to_string(KernelNormalization k);
std::string_view to_string(InitKind k);
std::optional<DiffusionKind> parse_diffusion_kind(std::string_view s);
std::optional<NoiseKind> parse_noise_kind(std::string_view s);
std::optional<KernelKind> parse_kernel_kind(std::string_view s);
std::optional<KernelNormalization> parse_kernel_normalization(std::string_view s);
std::optional<InitKind> parse_init_kind(std::string_view s);

struct InitSpec {
  InitKind kind = InitKind::ThreeBumps;
  int mode_x = 1;
  int mode_y = 0;
  double amplitude = 0.1;
  double offset = 1.0;
  double value = 1.0;               // constant(c)
  std::optional<Field> table;       // custom_table
  std::string table_path;           // provenance for custom_table
};

struct ModelSpec {
  double alpha = 0.4;
  double mu = 0.5;
  double ubar = 4.0;
  // Unset means the default 2*max(ubar, max_[0,ubar] |f|).
  std::optional<double> trunc_M;

  DiffusionKind diffusion = DiffusionKind::DegenerateLogistic;
  double diffusion_a0 = 1.0;

  NoiseKind noise = NoiseKind::Zero;
  double noise_amplitude = 1.2;

  KernelKind kernel = KernelKind::GaussianNormalized;
  KernelNormalization kernel_normalization = KernelNormalization::Analytic;
  // 0 disables the cutoff; otherwise kernel samples with radius > cutoff are zeroed.
  double kernel_cutoff = 0.0;

  InitSpec init;

  double resolved_trunc_M() const;
};

// max over [0, ubar] of |alpha u - mu u^2|.
double max_abs_reaction(const ModelSpec& spec);
// max over [0, ubar] of a(u).
double max_diffusion(const ModelSpec& spec);

double diffusion_a(double u, const ModelSpec& spec);
// A(s) = int_0^s a.
double antiderivative_A(double u, const ModelSpec& spec);
// AA(s) = int_0^s A.
double antiderivative_AA(double u, const ModelSpec& spec);
double reaction_f(double u, const ModelSpec& spec);
double reaction_truncated(double u, const ModelSpec& spec);
double reaction_truncated(double u, const ModelSpec& spec, double M);
double noise_sigma(double u, const ModelSpec& spec);
double noise_sigma_prime(double u, const ModelSpec& spec);
double kernel_value(double x, double y);

Field initial_condition(const Grid2D& grid, const ModelSpec& spec);

// u0 * (1 + delta*xi) clamped to [0, ubar - margin], xi iid N(0,1) in node order.
Field perturb_initial(const Field& u0, double delta, double ubar, double margin, RngStream& stream);

struct ValidationReport {
  std::vector<std::string> violations;
  bool ok() const { return violations.empty(); }
  std::string message() const;
};

class ValidationError : public std::invalid_argument {
 public:
  explicit ValidationError(ValidationReport r) : std::invalid_argument(r.message()), report(std::move(r)) {}
  ValidationReport report;
};

ValidationReport check(const ModelSpec& spec, const Grid2D& grid);
// Throws ValidationError on any violation; otherwise returns a copy with trunc_M resolved.
ModelSpec validate(const ModelSpec& spec, const Grid2D& grid);

}  // namespace stochagg
