#include "imsp/grid.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "imsp/error.hpp"

namespace imsp {

UniformGrid::UniformGrid(int dim_, const Point& origin_, double h_, std::array<int, 3> counts_)
    : dim(dim_), origin(origin_), h(h_), counts(counts_) {
  if (dim != 2 && dim != 3) throw std::invalid_argument("UniformGrid: dim must be 2 or 3");
  if (!(h > 0.0)) throw std::invalid_argument("UniformGrid: h must be positive");
  if (dim == 2) {
    counts[2] = 1;
    origin[2] = 0.0;
  }
  for (int a = 0; a < dim; ++a) {
    if (counts[a] < 1) throw std::invalid_argument("UniformGrid: counts must be >= 1");
  }
}

UniformGrid UniformGrid::covering(int dim, const Point& lo, const Point& hi, double h) {
  std::array<int, 3> counts{1, 1, 1};
  for (int a = 0; a < dim; ++a) {
    const double cells = (hi[a] - lo[a]) / h;
    const long n = std::lround(cells);
    if (n < 1 || std::abs(cells - static_cast<double>(n)) > 1e-9 * std::max(1.0, cells)) {
      throw std::invalid_argument("UniformGrid::covering: extent is not a whole number of cells");
    }
    counts[a] = static_cast<int>(n);
  }
  return UniformGrid(dim, lo, h, counts);
}

std::size_t UniformGrid::size() const noexcept {
  return static_cast<std::size_t>(counts[0]) * counts[1] * (dim == 3 ? counts[2] : 1);
}

std::array<int, 3> UniformGrid::multi_index(std::size_t linear) const noexcept {
  if (dim == 2) {
    return {static_cast<int>(linear / counts[1]), static_cast<int>(linear % counts[1]), 0};
  }
  const std::size_t plane = static_cast<std::size_t>(counts[1]) * counts[2];
  const std::size_t rem = linear % plane;
  return {static_cast<int>(linear / plane), static_cast<int>(rem / counts[2]),
          static_cast<int>(rem % counts[2])};
}

std::size_t UniformGrid::linear_index(const std::array<int, 3>& idx) const noexcept {
  if (dim == 2) return static_cast<std::size_t>(idx[0]) * counts[1] + idx[1];
  return (static_cast<std::size_t>(idx[0]) * counts[1] + idx[1]) * counts[2] + idx[2];
}

Point UniformGrid::center(const std::array<int, 3>& idx) const noexcept {
  Point p{0.0, 0.0, 0.0};
  for (int a = 0; a < dim; ++a) p[a] = origin[a] + (idx[a] + 0.5) * h;
  return p;
}

Point UniformGrid::center(std::size_t linear) const noexcept { return center(multi_index(linear)); }

Point UniformGrid::upper_corner() const noexcept {
  Point p{0.0, 0.0, 0.0};
  for (int a = 0; a < dim; ++a) p[a] = origin[a] + counts[a] * h;
  return p;
}

double UniformGrid::cell_volume() const noexcept { return dim == 2 ? h * h : h * h * h; }

RealField::RealField(const UniformGrid& g, std::vector<double> v) : grid(g), values(std::move(v)) {
  if (values.size() != grid.size()) throw std::invalid_argument("RealField: size mismatch");
}

ComplexField::ComplexField(const UniformGrid& g, std::vector<Complex> v) : grid(g), values(std::move(v)) {
  if (values.size() != grid.size()) throw std::invalid_argument("ComplexField: size mismatch");
}

SubdomainMask::SubdomainMask(const UniformGrid& grid, std::vector<std::uint8_t> mask)
    : grid_(grid), mask_(std::move(mask)), position_(grid_.size(), -1) {
  if (mask_.size() != grid_.size()) throw std::invalid_argument("SubdomainMask: size mismatch");
  for (std::size_t i = 0; i < mask_.size(); ++i) {
    if (mask_[i]) {
      mask_[i] = 1;
      position_[i] = static_cast<std::ptrdiff_t>(cells_.size());
      cells_.push_back(i);
    }
  }
}

SubdomainMask SubdomainMask::from_cells(const UniformGrid& grid, std::span<const std::size_t> cells) {
  std::vector<std::uint8_t> mask(grid.size(), 0);
  for (std::size_t c : cells) {
    if (c >= mask.size()) throw std::out_of_range("SubdomainMask: cell index out of range");
    mask[c] = 1;
  }
  return SubdomainMask(grid, std::move(mask));
}

std::ptrdiff_t SubdomainMask::position(std::size_t linear) const noexcept {
  return linear < position_.size() ? position_[linear] : -1;
}

void validate(const ScattererSpec& spec, int dim) {
  for (const auto& prim : spec.primitives) {
    if (const auto* box = std::get_if<BoxPrimitive>(&prim)) {
      for (int a = 0; a < dim; ++a) {
        if (!(box->widths[a] > 0.0)) throw std::invalid_argument("box primitive: widths must be positive");
      }
    } else {
      const auto& ring = std::get<RingBoxPrimitive>(prim);
      if (!(ring.inner_width > 0.0) || !(ring.inner_width < ring.outer_width)) {
        throw std::invalid_argument("ring primitive: need 0 < inner width < outer width");
      }
    }
  }
}

namespace {

// Closed-box membership of a cell centre, tolerant to rounding of centres
// that sit exactly on a face.
bool inside_box(const Point& p, const Point& center, const Point& widths, int dim, double tol) {
  for (int a = 0; a < dim; ++a) {
    if (std::abs(p[a] - center[a]) > 0.5 * widths[a] + tol) return false;
  }
  return true;
}

bool strictly_inside_box(const Point& p, const Point& center, double width, int dim, double tol) {
  for (int a = 0; a < dim; ++a) {
    if (std::abs(p[a] - center[a]) >= 0.5 * width - tol) return false;
  }
  return true;
}

void check_in_grid(const UniformGrid& grid, const Point& center, const Point& widths) {
  const Point lo = grid.lower_corner();
  const Point hi = grid.upper_corner();
  const double tol = 1e-9 * grid.h;
  for (int a = 0; a < grid.dim; ++a) {
    if (center[a] - 0.5 * widths[a] < lo[a] - tol || center[a] + 0.5 * widths[a] > hi[a] + tol) {
      throw GeometryError("rasterize: primitive extends outside the grid");
    }
  }
}

}  // namespace

RealField rasterize(const ScattererSpec& spec, const UniformGrid& grid) {
  validate(spec, grid.dim);
  RealField out(grid, 0.0);
  const double tol = 1e-9 * grid.h;
  for (const auto& prim : spec.primitives) {
    if (const auto* box = std::get_if<BoxPrimitive>(&prim)) {
      check_in_grid(grid, box->center, box->widths);
    } else {
      const auto& ring = std::get<RingBoxPrimitive>(prim);
      check_in_grid(grid, ring.center, {ring.outer_width, ring.outer_width, ring.outer_width});
    }
  }
  for (std::size_t c = 0; c < grid.size(); ++c) {
    const Point p = grid.center(c);
    for (const auto& prim : spec.primitives) {
      if (const auto* box = std::get_if<BoxPrimitive>(&prim)) {
        if (inside_box(p, box->center, box->widths, grid.dim, tol)) out.values[c] = box->value;
      } else {
        const auto& ring = std::get<RingBoxPrimitive>(prim);
        const Point outer{ring.outer_width, ring.outer_width, ring.outer_width};
        if (inside_box(p, ring.center, outer, grid.dim, tol) &&
            !strictly_inside_box(p, ring.center, ring.inner_width, grid.dim, tol)) {
          out.values[c] = ring.value;
        }
      }
    }
  }
  return out;
}

ReceiverSet make_receivers_circle(const Point& center, double radius, int count) {
  if (count < 1) throw std::invalid_argument("make_receivers_circle: count must be >= 1");
  if (!(radius > 0.0)) throw std::invalid_argument("make_receivers_circle: radius must be positive");
  ReceiverSet set;
  set.dim = 2;
  set.geometry = CircleGeometry{center, radius, count};
  set.points.reserve(count);
  for (int m = 0; m < count; ++m) {
    const double theta = 2.0 * std::numbers::pi * m / count;
    set.points.push_back({center[0] + radius * std::cos(theta), center[1] + radius * std::sin(theta), 0.0});
  }
  return set;
}

ReceiverSet make_receivers_cube(const Point& center, double width, int per_axis) {
  if (per_axis < 1) throw std::invalid_argument("make_receivers_cube: per_axis must be >= 1");
  if (!(width > 0.0)) throw std::invalid_argument("make_receivers_cube: width must be positive");
  ReceiverSet set;
  set.dim = 3;
  set.geometry = CubeSurfaceGeometry{center, width, per_axis};
  const double half = 0.5 * width;
  const double step = width / per_axis;
  set.points.reserve(6 * per_axis * per_axis);
  for (int axis = 0; axis < 3; ++axis) {
    const int u_axis = (axis + 1) % 3;
    const int v_axis = (axis + 2) % 3;
    for (int side : {-1, 1}) {
      for (int i = 0; i < per_axis; ++i) {
        for (int j = 0; j < per_axis; ++j) {
          Point p = center;
          p[axis] += side * half;
          p[u_axis] += -half + (i + 0.5) * step;
          p[v_axis] += -half + (j + 0.5) * step;
          set.points.push_back(p);
        }
      }
    }
  }
  return set;
}

ReceiverSet make_receivers(const ReceiverGeometry& geometry) {
  if (const auto* c = std::get_if<CircleGeometry>(&geometry)) {
    return make_receivers_circle(c->center, c->radius, c->count);
  }
  const auto& q = std::get<CubeSurfaceGeometry>(geometry);
  return make_receivers_cube(q.center, q.width, q.per_axis);
}

IncidentWave::IncidentWave(double k_, const Point& d) : k(k_), direction(d) {
  if (!(k > 0.0)) throw std::invalid_argument("IncidentWave: k must be positive");
  const double norm = std::sqrt(d[0] * d[0] + d[1] * d[1] + d[2] * d[2]);
  if (std::abs(norm - 1.0) > 1e-12) throw std::invalid_argument("IncidentWave: direction must be a unit vector");
}

Complex incident_field(const IncidentWave& wave, const Point& x) {
  const double phase =
      wave.k * (x[0] * wave.direction[0] + x[1] * wave.direction[1] + x[2] * wave.direction[2]);
  return {std::cos(phase), std::sin(phase)};
}

std::vector<Complex> incident_field(const IncidentWave& wave, std::span<const Point> points) {
  std::vector<Complex> out;
  out.reserve(points.size());
  for (const auto& p : points) out.push_back(incident_field(wave, p));
  return out;
}

}  // namespace imsp
