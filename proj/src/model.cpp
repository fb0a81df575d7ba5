#include "stochagg/model.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <sstream>

namespace stochagg {

namespace {

template <typename E, std::size_t N>
std::optional<E> lookup(const std::array<std::pair<E, std::string_view>, N>& table, std::string_view s) {
  for (const auto& [e, name] : table)
    if (name == s) return e;
  return std::nullopt;
}

template <typename E, std::size_t N>
std::string_view name_of(const std::array<std::pair<E, std::string_view>, N>& table, E e) {
  for (const auto& [k, name] : table)
    if (k == e) return name;
  return "?";
}

constexpr std::array<std::pair<DiffusionKind, std::string_view>, 2> kDiffusionNames{{
    {DiffusionKind::DegenerateLogistic, "degenerate_logistic"},
    {DiffusionKind::Constant, "constant"},
}};
constexpr std::array<std::pair<NoiseKind, std::string_view>, 3> kNoiseNames{{
    {NoiseKind::Zero, "zero"},
    {NoiseKind::PropShifted, "prop_shifted"},
    {NoiseKind::Periodic, "periodic"},
}};
constexpr std::array<std::pair<KernelKind, std::string_view>, 2> kKernelNames{{
    {KernelKind::GaussianNormalized, "gaussian_normalized"},
    {KernelKind::Disabled, "disabled"},
}};
constexpr std::array<std::pair<KernelNormalization, std::string_view>, 2> kNormNames{{
    {KernelNormalization::Analytic, "analytic"},
    {KernelNormalization::DiscreteSum, "discrete_sum"},
}};
constexpr std::array<std::pair<InitKind, std::string_view>, 5> kInitNames{{
    {InitKind::ThreeBumps, "three_bumps"},
    {InitKind::ThreeBumpsSymmetrized, "three_bumps_symmetrized"},
    {InitKind::SingleCosine, "single_cosine"},
    {InitKind::Constant, "constant"},
    {InitKind::CustomTable, "custom_table"},
}};

double three_bumps(double x, double y, bool symmetrized) {
  // The first bump is printed with exponent (x+1)^2 + x^2; the symmetrized variant uses y.
  const double first = symmetrized ? (x + 1) * (x + 1) + y * y : (x + 1) * (x + 1) + x * x;
  return 2.0 * std::exp(-first) + 1.5 * std::exp(-(x * x + (y - 1) * (y - 1))) +
         2.0 * std::exp(-((x - 1.5) * (x - 1.5) + (y + 1) * (y + 1)));
}

}  // namespace

std::string_view to_string(DiffusionKind k) { return name_of(kDiffusionNames, k); }
std::string_view to_string(NoiseKind k) { return name_of(kNoiseNames, k); }
std::string_view to_string(KernelKind k) { return name_of(kKernelNames, k); }
std::string_view to_string(KernelNormalization k) { return name_of(kNormNames, k); }
std::string_view to_string(InitKind k) { return name_of(kInitNames, k); }
std::optional<DiffusionKind> parse_diffusion_kind(std::string_view s) { return lookup(kDiffusionNames, s); }
std::optional<NoiseKind> parse_noise_kind(std::string_view s) { return lookup(kNoiseNames, s); }
std::optional<KernelKind> parse_kernel_kind(std::string_view s) { return lookup(kKernelNames, s); }
std::optional<KernelNormalization> parse_kernel_normalization(std::string_view s) { return lookup(kNormNames, s); }
std::optional<InitKind> parse_init_kind(std::string_view s) { return lookup(kInitNames, s); }

double max_abs_reaction(const ModelSpec& spec) {
  double m = std::max(0.0, std::abs(reaction_f(spec.ubar, spec)));
  if (spec.mu > 0.0) {
    const double peak = std::clamp(spec.alpha / (2.0 * spec.mu), 0.0, spec.ubar);
    m = std::max(m, std::abs(reaction_f(peak, spec)));
  }
  return m;
}

double max_diffusion(const ModelSpec& spec) {
  if (spec.diffusion == DiffusionKind::Constant) return spec.diffusion_a0;
  return spec.ubar * spec.ubar / 4.0;
}

double ModelSpec::resolved_trunc_M() const {
  if (trunc_M) return *trunc_M;
  return 2.0 * std::max(ubar, max_abs_reaction(*this));
}

double diffusion_a(double u, const ModelSpec& spec) {
  if (spec.diffusion == DiffusionKind::Constant) return spec.diffusion_a0;
  return u * (spec.ubar - u);
}

double antiderivative_A(double u, const ModelSpec& spec) {
  if (spec.diffusion == DiffusionKind::Constant) return spec.diffusion_a0 * u;
  return spec.ubar * u * u / 2.0 - u * u * u / 3.0;
}

double antiderivative_AA(double u, const ModelSpec& spec) {
  if (spec.diffusion == DiffusionKind::Constant) return spec.diffusion_a0 * u * u / 2.0;
  const double u3 = u * u * u;
  return spec.ubar * u3 / 6.0 - u3 * u / 12.0;
}

double reaction_f(double u, const ModelSpec& spec) { return spec.alpha * u - spec.mu * u * u; }

double reaction_truncated(double u, const ModelSpec& spec, double M) {
  if (u > M) return M;
  if (u < -M) return -M;
  return reaction_f(u, spec);
}

double reaction_truncated(double u, const ModelSpec& spec) {
  return reaction_truncated(u, spec, spec.resolved_trunc_M());
}

double noise_sigma(double u, const ModelSpec& spec) {
  const double c = spec.noise_amplitude;
  switch (spec.noise) {
    case NoiseKind::Zero:
      return 0.0;
    case NoiseKind::PropShifted:
      return c * std::min(u, spec.ubar - u);
    case NoiseKind::Periodic: {
      // sin(pi s) = sin(pi (1 - s)); folding keeps sigma(ubar) exactly 0.
      const double s = (u > 0.5 * spec.ubar) ? spec.ubar - u : u;
      return c * std::sin(std::numbers::pi * s / spec.ubar);
    }
  }
  return 0.0;
}

double noise_sigma_prime(double u, const ModelSpec& spec) {
  const double c = spec.noise_amplitude;
  switch (spec.noise) {
    case NoiseKind::Zero:
      return 0.0;
    case NoiseKind::PropShifted: {
      const double half = 0.5 * spec.ubar;
      if (u < half) return c;
      if (u > half) return -c;
      return 0.0;
    }
    case NoiseKind::Periodic:
      return c * std::numbers::pi / spec.ubar * std::cos(std::numbers::pi * u / spec.ubar);
  }
  return 0.0;
}

double kernel_value(double x, double y) {
  return std::exp(-(x * x + y * y) / 2.0) / (2.0 * std::numbers::pi);
}

Field initial_condition(const Grid2D& grid, const ModelSpec& spec) {
  const InitSpec& init = spec.init;
  if (init.kind == InitKind::CustomTable) {
    if (!init.table) throw std::invalid_argument("custom_table initial condition has no table");
    require_same_grid(init.table->grid(), grid, "custom_table initial condition");
    init.table->require_finite("custom_table initial condition");
    return *init.table;
  }
  Field u(grid);
  const double lx = grid.xmax - grid.xmin, ly = grid.ymax - grid.ymin;
  for (int j = 0; j < grid.ny; ++j) {
    for (int i = 0; i < grid.nx; ++i) {
      const auto [x, y] = grid.node_coords(i, j);
      double val = 0.0;
      switch (init.kind) {
        case InitKind::ThreeBumps:
          val = three_bumps(x, y, false);
          break;
        case InitKind::ThreeBumpsSymmetrized:
          val = three_bumps(x, y, true);
          break;
        case InitKind::SingleCosine:
          val = init.offset + init.amplitude * std::cos(init.mode_x * std::numbers::pi * (x - grid.xmin) / lx) *
                                  std::cos(init.mode_y * std::numbers::pi * (y - grid.ymin) / ly);
          break;
        case InitKind::Constant:
          val = init.value;
          break;
        case InitKind::CustomTable:
          break;
      }
      u(i, j) = val;
    }
  }
  return u;
}

Field perturb_initial(const Field& u0, double delta, double ubar, double margin, RngStream& stream) {
  Field out = u0;
  if (delta == 0.0) return out;
  const double hi = ubar - margin;
  for (double& v : out.values()) v = std::clamp(v * (1.0 + delta * stream.next_normal()), 0.0, hi);
  return out;
}

std::string ValidationReport::message() const {
  std::ostringstream os;
  os << "model validation failed:";
  for (const auto& v : violations) os << "\n  - " << v;
  return os.str();
}

ValidationReport check(const ModelSpec& spec, const Grid2D& grid) {
  ValidationReport r;
  auto fail = [&r](std::string msg) { r.violations.push_back(std::move(msg)); };

  if (!(spec.ubar > 0.0) || !std::isfinite(spec.ubar)) fail("ubar must be positive");
  if (!(spec.alpha >= 0.0)) fail("alpha must be nonnegative");
  if (!(spec.mu >= 0.0)) fail("mu must be nonnegative");
  if (!r.ok()) return r;

  const double need = std::max(spec.ubar, max_abs_reaction(spec));
  if (spec.trunc_M && !(*spec.trunc_M >= need)) {
    std::ostringstream os;
    os << "trunc_M must be >= max(ubar, max |f| on [0,ubar]) = " << need;
    fail(os.str());
  }

  if (spec.diffusion == DiffusionKind::DegenerateLogistic) {
    if (diffusion_a(0.0, spec) != 0.0 || diffusion_a(spec.ubar, spec) != 0.0)
      fail("diffusion must vanish at 0 and ubar");
    for (int k = 1; k < 64; ++k) {
      if (!(diffusion_a(spec.ubar * k / 64.0, spec) > 0.0)) {
        fail("diffusion must be positive on (0, ubar)");
        break;
      }
    }
  } else if (!(spec.diffusion_a0 >= 0.0)) {
    fail("constant diffusion a0 must be nonnegative");
  }

  if (spec.noise != NoiseKind::Zero) {
    if (noise_sigma(0.0, spec) != 0.0) fail("noise must vanish at 0");
    if (noise_sigma(spec.ubar, spec) != 0.0) fail("noise must vanish at ubar");
  }
  if (!(spec.kernel_cutoff >= 0.0)) fail("kernel_cutoff must be nonnegative");

  try {
    const Field u0 = initial_condition(grid, spec);
    double mx = -1e300, mn = 1e300;
    for (double v : u0.values()) {
      if (!std::isfinite(v)) {
        fail("initial condition is not finite");
        break;
      }
      mx = std::max(mx, v);
      mn = std::min(mn, v);
    }
    if (mx >= spec.ubar) fail("initial condition exceeds ubar");
    if (mn < 0.0) fail("initial condition must be nonnegative");
  } catch (const std::exception& e) {
    fail(std::string("initial condition: ") + e.what());
  }
  return r;
}

ModelSpec validate(const ModelSpec& spec, const Grid2D& grid) {
  ValidationReport r = check(spec, grid);
  if (!r.ok()) throw ValidationError(std::move(r));
  ModelSpec out = spec;
  out.trunc_M = spec.resolved_trunc_M();
  return out;
}

}  // namespace stochagg
