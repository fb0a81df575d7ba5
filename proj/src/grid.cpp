#include "stochagg/grid.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace stochagg {

Grid2D::Grid2D(int nx_nodes, int ny_nodes, double x0, double x1, double y0, double y1)
    : nx(nx_nodes), ny(ny_nodes), xmin(x0), xmax(x1), ymin(y0), ymax(y1) {
  if (nx < 3 || ny < 3) throw std::invalid_argument("grid needs at least 3 nodes per axis");
  if (!std::isfinite(x0) || !std::isfinite(x1) || !std::isfinite(y0) || !std::isfinite(y1))
    throw std::invalid_argument("grid bounds must be finite");
  if (!(x1 > x0) || !(y1 > y0)) throw std::invalid_argument("grid bounds must satisfy max > min");
}

Grid2D Grid2D::square(int cells, double lo, double hi) { return Grid2D(cells + 1, cells + 1, lo, hi, lo, hi); }

std::pair<double, double> Grid2D::node_coords(int i, int j) const {
  if (i < 0 || i >= nx || j < 0 || j >= ny) {
    std::ostringstream os;
    os << "node index (" << i << ", " << j << ") outside " << nx << "x" << ny << " grid";
    throw std::out_of_range(os.str());
  }
  return {xmin + i * dx(), ymin + j * dy()};
}

Field::Field(const Grid2D& grid, double fill) : grid_(grid), values_(grid.size(), fill) {}

Field::Field(const Grid2D& grid, std::vector<double> values) : grid_(grid), values_(std::move(values)) {
  if (values_.size() != grid_.size()) throw std::invalid_argument("field size does not match grid");
}

void Field::require_finite(const char* what) const {
  for (std::size_t k = 0; k < values_.size(); ++k) {
    if (!std::isfinite(values_[k])) {
      std::ostringstream os;
      os << what << ": non-finite value at node (" << k % grid_.nx << ", " << k / grid_.nx << ")";
      throw std::domain_error(os.str());
    }
  }
}

void require_same_grid(const Grid2D& a, const Grid2D& b, const char* what) {
  if (!(a == b)) throw GridMismatch(std::string(what) + ": grid mismatch");
}

double midpoint_avg(const Field& u, Axis axis, int i, int j) {
  const Grid2D& g = u.grid();
  if (axis == Axis::X) {
    if (i < 0 || i + 1 >= g.nx || j < 0 || j >= g.ny) throw std::out_of_range("x half-index out of range");
    return 0.5 * (u(i + 1, j) + u(i, j));
  }
  if (i < 0 || i >= g.nx || j < 0 || j + 1 >= g.ny) throw std::out_of_range("y half-index out of range");
  return 0.5 * (u(i, j + 1) + u(i, j));
}

double integrate(const Field& u) {
  double s = 0.0;
  for (double v : u.values()) s += v;
  return s * u.grid().cell_area();
}

Norms norms(const Field& u) {
  Norms n;
  double l1 = 0.0, l2 = 0.0, linf = 0.0;
  double mn = std::numeric_limits<double>::infinity();
  for (double v : u.values()) {
    l1 += std::abs(v);
    l2 += v * v;
    linf = std::max(linf, std::abs(v));
    mn = std::min(mn, v);
  }
  const double w = u.grid().cell_area();
  n.l1 = l1 * w;
  n.l2 = std::sqrt(l2 * w);
  n.linf = linf;
  n.min = u.size() ? mn : 0.0;
  return n;
}

double quadrature_area(const Grid2D& grid) { return static_cast<double>(grid.size()) * grid.cell_area(); }

}  // namespace stochagg
