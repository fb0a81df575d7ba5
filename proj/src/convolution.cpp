#include "stochagg/convolution.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <mutex>
#include <stdexcept>

namespace stochagg {

namespace {

// The FFTW planner is not reentrant.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

}  // namespace

std::string_view to_string(ConvBackend b) { return b == ConvBackend::Fft ? "fft" : "direct"; }

std::optional<ConvBackend> parse_conv_backend(std::string_view s) {
  if (s == "fft") return ConvBackend::Fft;
  if (s == "direct") return ConvBackend::Direct;
  return std::nullopt;
}

KernelTable::KernelTable(const Grid2D& grid, std::vector<double> values) : grid_(grid), values_(std::move(values)) {
  if (values_.size() != static_cast<std::size_t>(width()) * height())
    throw std::invalid_argument("kernel table size does not match grid");
}

KernelTable sample_table(const Grid2D& grid, const std::function<double(double, double)>& kernel) {
  const int px = grid.nx - 1, py = grid.ny - 1;
  const int w = 2 * px + 1, h = 2 * py + 1;
  std::vector<double> vals(static_cast<std::size_t>(w) * h);
  const double dx = grid.dx(), dy = grid.dy();
  for (int q = -py; q <= py; ++q)
    for (int p = -px; p <= px; ++p) vals[static_cast<std::size_t>(q + py) * w + (p + px)] = kernel(p * dx, q * dy);
  return KernelTable(grid, std::move(vals));
}

KernelTable build_table(const Grid2D& grid, const ModelSpec& spec) {
  if (spec.kernel == KernelKind::Disabled) return sample_table(grid, [](double, double) { return 0.0; });
  const double cutoff = spec.kernel_cutoff;
  KernelTable t = sample_table(grid, [cutoff](double x, double y) {
    if (cutoff > 0.0 && x * x + y * y > cutoff * cutoff) return 0.0;
    return kernel_value(x, y);
  });
  if (spec.kernel_normalization == KernelNormalization::DiscreteSum) {
    double s = 0.0;
    for (double v : t.values()) s += v;
    s *= grid.cell_area();
    std::vector<double> vals = t.values();
    for (double& v : vals) v /= s;
    t = KernelTable(grid, std::move(vals));
  }
  return t;
}

Field convolve_direct(const Field& u, const KernelTable& table) {
  const Grid2D& g = u.grid();
  require_same_grid(g, table.grid(), "convolve_direct");
  Field v(g);
  const double w = g.cell_area();
  for (int j = 0; j < g.ny; ++j) {
    for (int i = 0; i < g.nx; ++i) {
      double s = 0.0;
      for (int q = 0; q < g.ny; ++q)
        for (int p = 0; p < g.nx; ++p) s += table.at(i - p, j - q) * u(p, q);
      v(i, j) = s * w;
    }
  }
  return v;
}

int fft_friendly_size(int n) {
  for (int m = std::max(n, 1);; ++m) {
    int r = m;
    for (int f : {2, 3, 5, 7})
      while (r % f == 0) r /= f;
    if (r == 1) return m;
  }
}

struct FftConvolver::Impl {
  Grid2D grid;
  int px = 0, py = 0;    // padded real sizes
  int pxc = 0;           // complex columns, px/2 + 1
  double* real = nullptr;
  fftw_complex* spec = nullptr;
  fftw_complex* kernel_hat = nullptr;
  fftw_plan forward = nullptr;
  fftw_plan backward = nullptr;

  ~Impl() {
    std::lock_guard lock(planner_mutex());
    if (forward) fftw_destroy_plan(forward);
    if (backward) fftw_destroy_plan(backward);
    fftw_free(real);
    fftw_free(spec);
    fftw_free(kernel_hat);
  }
};

FftConvolver::FftConvolver(const KernelTable& table) : impl_(std::make_unique<Impl>()) {
  Impl& m = *impl_;
  m.grid = table.grid();
  // Offsets -(n-1)..(n-1) must stay distinct modulo the padded length.
  m.px = fft_friendly_size(2 * m.grid.nx - 1);
  m.py = fft_friendly_size(2 * m.grid.ny - 1);
  m.pxc = m.px / 2 + 1;
  const std::size_t nreal = static_cast<std::size_t>(m.px) * m.py;
  const std::size_t ncplx = static_cast<std::size_t>(m.pxc) * m.py;
  m.real = fftw_alloc_real(nreal);
  m.spec = fftw_alloc_complex(ncplx);
  m.kernel_hat = fftw_alloc_complex(ncplx);
  if (!m.real || !m.spec || !m.kernel_hat) throw std::bad_alloc();
  {
    std::lock_guard lock(planner_mutex());
    // fftw's row-major layout: slow dimension first (y rows of x).
    m.forward = fftw_plan_dft_r2c_2d(m.py, m.px, m.real, m.spec, FFTW_ESTIMATE);
    m.backward = fftw_plan_dft_c2r_2d(m.py, m.px, m.spec, m.real, FFTW_ESTIMATE);
  }
  if (!m.forward || !m.backward) throw std::runtime_error("fftw planning failed");

  std::fill(m.real, m.real + nreal, 0.0);
  for (int q = -table.max_py(); q <= table.max_py(); ++q) {
    const int qq = (q + m.py) % m.py;
    for (int p = -table.max_px(); p <= table.max_px(); ++p) {
      const int pp = (p + m.px) % m.px;
      m.real[static_cast<std::size_t>(qq) * m.px + pp] = table.at(p, q);
    }
  }
  fftw_execute_dft_r2c(m.forward, m.real, m.kernel_hat);
}

FftConvolver::~FftConvolver() = default;
FftConvolver::FftConvolver(FftConvolver&&) noexcept = default;
FftConvolver& FftConvolver::operator=(FftConvolver&&) noexcept = default;

const Grid2D& FftConvolver::grid() const { return impl_->grid; }
int FftConvolver::padded_x() const { return impl_->px; }
int FftConvolver::padded_y() const { return impl_->py; }

void FftConvolver::apply(const Field& u, Field& out) {
  Impl& m = *impl_;
  require_same_grid(u.grid(), m.grid, "convolve_fft");
  if (!(out.grid() == m.grid)) out = Field(m.grid);
  const int nx = m.grid.nx, ny = m.grid.ny;
  const std::size_t nreal = static_cast<std::size_t>(m.px) * m.py;
  std::fill(m.real, m.real + nreal, 0.0);
  for (int j = 0; j < ny; ++j)
    std::copy_n(&u.values()[static_cast<std::size_t>(j) * nx], nx, m.real + static_cast<std::size_t>(j) * m.px);
  fftw_execute_dft_r2c(m.forward, m.real, m.spec);
  const std::size_t ncplx = static_cast<std::size_t>(m.pxc) * m.py;
  for (std::size_t k = 0; k < ncplx; ++k) {
    const double ar = m.spec[k][0], ai = m.spec[k][1];
    const double br = m.kernel_hat[k][0], bi = m.kernel_hat[k][1];
    m.spec[k][0] = ar * br - ai * bi;
    m.spec[k][1] = ar * bi + ai * br;
  }
  fftw_execute_dft_c2r(m.backward, m.spec, m.real);
  const double scale = m.grid.cell_area() / static_cast<double>(nreal);
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) out(i, j) = m.real[static_cast<std::size_t>(j) * m.px + i] * scale;
}

Field FftConvolver::apply(const Field& u) {
  Field out(impl_->grid);
  apply(u, out);
  return out;
}

Field convolve_fft(const Field& u, const KernelTable& table) {
  require_same_grid(u.grid(), table.grid(), "convolve_fft");
  FftConvolver c(table);
  return c.apply(u);
}

Convolver::Convolver(const KernelTable& table, ConvBackend backend) : table_(table), backend_(backend) {
  active_ = std::any_of(table_.values().begin(), table_.values().end(), [](double v) { return v != 0.0; });
  if (active_ && backend_ == ConvBackend::Fft) fft_ = std::make_unique<FftConvolver>(table_);
}

void Convolver::apply(const Field& u, Field& out) {
  if (!active_) {
    if (!(out.grid() == u.grid())) out = Field(u.grid());
    std::fill(out.values().begin(), out.values().end(), 0.0);
    return;
  }
  if (fft_) {
    fft_->apply(u, out);
  } else {
    out = convolve_direct(u, table_);
  }
}

}  // namespace stochagg
