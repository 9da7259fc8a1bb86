#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <variant>
#include <vector>

#include "imsp/special.hpp"

namespace imsp {

/// Axis-aligned uniform mesh of cells. Cell (i, j[, k]) has centre
/// origin + (index + 1/2) h per axis; linear indices are row-major over the
/// multi-index (last axis fastest).
struct UniformGrid {
  int dim = 2;
  Point origin{0.0, 0.0, 0.0};
  double h = 1.0;
  std::array<int, 3> counts{1, 1, 1};

  UniformGrid() = default;
  UniformGrid(int dim, const Point& origin, double h, std::array<int, 3> counts);

  /// Grid covering [lo, hi] per axis with cell width h; the extent must be a
  /// whole number of cells (to 1e-9 relative).
  static UniformGrid covering(int dim, const Point& lo, const Point& hi, double h);

  std::size_t size() const noexcept;
  std::array<int, 3> multi_index(std::size_t linear) const noexcept;
  std::size_t linear_index(const std::array<int, 3>& idx) const noexcept;
  Point center(std::size_t linear) const noexcept;
  Point center(const std::array<int, 3>& idx) const noexcept;
  Point lower_corner() const noexcept { return origin; }
  Point upper_corner() const noexcept;
  double cell_volume() const noexcept;

  bool operator==(const UniformGrid&) const = default;
};

struct RealField {
  UniformGrid grid;
  std::vector<double> values;

  RealField() = default;
  explicit RealField(const UniformGrid& g, double fill = 0.0) : grid(g), values(g.size(), fill) {}
  RealField(const UniformGrid& g, std::vector<double> v);
};

struct ComplexField {
  UniformGrid grid;
  std::vector<Complex> values;

  ComplexField() = default;
  explicit ComplexField(const UniformGrid& g) : grid(g), values(g.size(), Complex(0.0, 0.0)) {}
  ComplexField(const UniformGrid& g, std::vector<Complex> v);
};

/// Boolean subset of a grid's cells; `cells` lists the included linear
/// indices in increasing order.
class SubdomainMask {
 public:
  SubdomainMask() = default;
  SubdomainMask(const UniformGrid& grid, std::vector<std::uint8_t> mask);
  static SubdomainMask from_cells(const UniformGrid& grid, std::span<const std::size_t> cells);

  const UniformGrid& grid() const noexcept { return grid_; }
  const std::vector<std::uint8_t>& mask() const noexcept { return mask_; }
  const std::vector<std::size_t>& cells() const noexcept { return cells_; }
  bool contains(std::size_t linear) const noexcept { return mask_[linear] != 0; }
  std::size_t size() const noexcept { return cells_.size(); }
  bool empty() const noexcept { return cells_.empty(); }
  /// Position of a linear cell index inside `cells()`, or -1.
  std::ptrdiff_t position(std::size_t linear) const noexcept;

  bool operator==(const SubdomainMask& o) const { return grid_ == o.grid_ && mask_ == o.mask_; }

 private:
  UniformGrid grid_;
  std::vector<std::uint8_t> mask_;
  std::vector<std::size_t> cells_;
  std::vector<std::ptrdiff_t> position_;
};

struct BoxPrimitive {
  Point center{};
  Point widths{};
  double value = 1.0;
  bool operator==(const BoxPrimitive&) const = default;
};

/// Square (cube) shell: inside the outer box, outside the inner one.
struct RingBoxPrimitive {
  Point center{};
  double outer_width = 0.0;
  double inner_width = 0.0;
  double value = 1.0;
  bool operator==(const RingBoxPrimitive&) const = default;
};

using Primitive = std::variant<BoxPrimitive, RingBoxPrimitive>;

struct ScattererSpec {
  std::vector<Primitive> primitives;
  bool operator==(const ScattererSpec&) const = default;
};

/// Throws std::invalid_argument if a primitive has non-positive widths or a
/// ring's inner width is not smaller than its outer width.
void validate(const ScattererSpec& spec, int dim);

struct CircleGeometry {
  Point center{};
  double radius = 0.0;
  int count = 0;
  bool operator==(const CircleGeometry&) const = default;
};

struct CubeSurfaceGeometry {
  Point center{};
  double width = 0.0;
  int per_axis = 0;
  bool operator==(const CubeSurfaceGeometry&) const = default;
};

using ReceiverGeometry = std::variant<CircleGeometry, CubeSurfaceGeometry>;

struct ReceiverSet {
  int dim = 2;
  std::vector<Point> points;
  ReceiverGeometry geometry;
};

struct IncidentWave {
  double k = 0.0;
  Point direction{};

  IncidentWave() = default;
  /// Throws std::invalid_argument unless k > 0 and |d| = 1 within 1e-12.
  IncidentWave(double k, const Point& direction);
};

/// Cell-centre rasterization: each cell takes the value of the last primitive
/// containing its centre, 0 elsewhere. Throws GeometryError if a primitive
/// reaches outside the grid.
RealField rasterize(const ScattererSpec& spec, const UniformGrid& grid);

ReceiverSet make_receivers_circle(const Point& center, double radius, int count);

/// per_axis x per_axis face-interior lattice on each of the six faces of the
/// cube, offset half a lattice step from the edges: 6 per_axis^2 points.
ReceiverSet make_receivers_cube(const Point& center, double width, int per_axis);

ReceiverSet make_receivers(const ReceiverGeometry& geometry);

Complex incident_field(const IncidentWave& wave, const Point& x);
std::vector<Complex> incident_field(const IncidentWave& wave, std::span<const Point> points);

}  // namespace imsp
