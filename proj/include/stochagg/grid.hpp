#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

namespace stochagg {

// Uniform node-centred mesh on [xmin,xmax] x [ymin,ymax].
// nx, ny count nodes (cells + 1); x_i = xmin + i*dx for i = 0..nx-1.
struct Grid2D {
  int nx = 0;
  int ny = 0;
  double xmin = -4.0;
  double xmax = 4.0;
  double ymin = -4.0;
  double ymax = 4.0;

  Grid2D() = default;
  Grid2D(int nx_nodes, int ny_nodes, double x0, double x1, double y0, double y1);

  // Grid with the given number of cells per axis on (-4,4)^2.
  static Grid2D square(int cells, double lo = -4.0, double hi = 4.0);

  int cells_x() const { return nx - 1; }
  int cells_y() const { return ny - 1; }
  double dx() const { return (xmax - xmin) / cells_x(); }
  double dy() const { return (ymax - ymin) / cells_y(); }
  double cell_area() const { return dx() * dy(); }
  std::size_t size() const { return static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny); }
  // Row-major, i (x index) contiguous: index = j*nx + i.
  std::size_t index(int i, int j) const { return static_cast<std::size_t>(j) * nx + i; }

  std::pair<double, double> node_coords(int i, int j) const;

  bool operator==(const Grid2D& other) const = default;
};

class GridMismatch : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

enum class Axis { X, Y };

// One scalar per grid node, same layout as Grid2D::index.
class Field {
 public:
  Field() = default;
  explicit Field(const Grid2D& grid, double fill = 0.0);
  Field(const Grid2D& grid, std::vector<double> values);

  const Grid2D& grid() const { return grid_; }
  std::size_t size() const { return values_.size(); }

  double& operator()(int i, int j) { return values_[grid_.index(i, j)]; }
  double operator()(int i, int j) const { return values_[grid_.index(i, j)]; }
  double& operator[](std::size_t k) { return values_[k]; }
  double operator[](std::size_t k) const { return values_[k]; }

  std::span<double> values() { return values_; }
  std::span<const double> values() const { return values_; }
  std::vector<double>& storage() { return values_; }

  // Throws std::domain_error naming the first non-finite node.
  void require_finite(const char* what) const;

  bool operator==(const Field& other) const = default;

 private:
  Grid2D grid_;
  std::vector<double> values_;
};

void require_same_grid(const Grid2D& a, const Grid2D& b, const char* what);

// Mean of the two nodes adjacent to the half index (i+1/2, j) or (i, j+1/2).
double midpoint_avg(const Field& u, Axis axis, int i, int j);

// Plain nodal quadrature: sum of values * dx * dy.
double integrate(const Field& u);

struct Norms {
  double l1 = 0.0;
  double l2 = 0.0;
  double linf = 0.0;
  double min = 0.0;
};

Norms norms(const Field& u);

// Domain area as seen by the nodal quadrature (nx*dx * ny*dy).
double quadrature_area(const Grid2D& grid);

}  // namespace stochagg
