#pragma once

#include <array>
#include <complex>

namespace imsp {

using Complex = std::complex<double>;

/// Cartesian point; 2D problems leave the third coordinate at zero.
using Point = std::array<double, 3>;

/// Below this argument J0/Y0 are summed from their power series, above it
/// from the Hankel phase-amplitude expansion.
inline constexpr double kBesselSwitch = 12.0;

/// Bessel function of the first kind, order zero. Throws DomainError for
/// negative or non-finite x.
double bessel_j0(double x);

/// Bessel function of the second kind, order zero. Throws DomainError for
/// x <= 0 or non-finite x.
double bessel_y0(double x);

/// H_0^(1)(x) = J0(x) + i Y0(x), x > 0.
Complex hankel1_0(double x);

/// Outgoing Helmholtz fundamental solution as a function of the distance
/// r > 0: (i/4) H_0^(1)(kr) in 2D, e^{ikr} / (4 pi r) in 3D.
Complex green_radial(double k, double r, int dim);

/// G(x, y). Throws SingularityError when x == y; self-cells go through
/// green_diag instead.
Complex green(double k, const Point& x, const Point& y, int dim);

/// Mean of G(x, 0) over the centred cell [-h/2, h/2]^dim, evaluated with a
/// tensor Gauss-Legendre rule of `nodes` points per axis on each of the
/// 2*dim simplices (triangles / square pyramids) that have their apex at the
/// singular centre. `nodes` must be even and >= 2.
Complex green_cell_average(double k, double h, int dim, int nodes);

/// Self-cell value of G: green_cell_average with the node count doubled from
/// 16 until two successive rules agree to 1e-8 relative.
Complex green_diag(double k, double h, int dim);

namespace detail {

double j0_series(double x);
double y0_series(double x);
/// Asymptotic J0 + i Y0 for large x.
Complex hankel1_0_asymptotic(double x);

}  // namespace detail

}  // namespace imsp
