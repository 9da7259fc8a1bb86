#include "imsp/special.hpp"

#include <cmath>
#include <iostream>
#include <numbers>
#include <vector>

#include "imsp/error.hpp"

namespace imsp {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kEulerGamma = std::numbers::egamma;

struct GaussRule {
  std::vector<double> nodes;    // on [0, 1]
  std::vector<double> weights;  // sum to 1
};

// Gauss-Legendre rule mapped to [0, 1]; roots by Newton on P_n.
GaussRule gauss_legendre_unit(int n) {
  GaussRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double z = std::cos(kPi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0;
      double p1 = z;
      for (int j = 2; j <= n; ++j) {
        const double p2 = ((2.0 * j - 1.0) * z * p1 - (j - 1.0) * p0) / j;
        p0 = p1;
        p1 = p2;
      }
      if (n == 1) p0 = 1.0;
      dp = n * (z * p1 - p0) / (z * z - 1.0);
      const double dz = p1 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-16) break;
    }
    const double w = 1.0 / ((1.0 - z * z) * dp * dp);  // half of the [-1,1] weight
    rule.nodes[i] = 0.5 * (1.0 - z);
    rule.nodes[n - 1 - i] = 0.5 * (1.0 + z);
    rule.weights[i] = w;
    rule.weights[n - 1 - i] = w;
  }
  return rule;
}

void require_finite(double x, const char* fn) {
  if (!std::isfinite(x)) {
    throw DomainError(std::string(fn) + ": non-finite argument");
  }
}

}  // namespace

namespace detail {

double j0_series(double x) {
  const double q = -0.25 * x * x;
  double term = 1.0;
  double sum = 1.0;
  for (int m = 1; m < 200; ++m) {
    term *= q / (static_cast<double>(m) * m);
    sum += term;
    if (std::abs(term) < 1e-17 * std::abs(sum) && m > x) break;
  }
  return sum;
}

double y0_series(double x) {
  const double q = -0.25 * x * x;
  double term = 1.0;
  double harmonic = 0.0;
  double tail = 0.0;
  for (int m = 1; m < 200; ++m) {
    term *= q / (static_cast<double>(m) * m);
    harmonic += 1.0 / m;
    tail -= harmonic * term;
    if (std::abs(harmonic * term) < 1e-17 * (std::abs(tail) + 1e-300) && m > x) break;
  }
  return (2.0 / kPi) * ((std::log(0.5 * x) + kEulerGamma) * j0_series(x) + tail);
}

// H0(x) ~ sqrt(2/(pi x)) (P + iQ) e^{i(x - pi/4)}, with
// a_k = a_{k-1} * (-(2k-1)^2) / (8k) and P, Q the even/odd parts of sum a_k (i/x)^k.
Complex hankel1_0_asymptotic(double x) {
  double p = 1.0;
  double q = 0.0;
  double a = 1.0;
  double prev = 1.0;
  double inv_x_pow = 1.0;
  for (int k = 1; k < 60; ++k) {
    a *= -((2.0 * k - 1.0) * (2.0 * k - 1.0)) / (8.0 * k);
    inv_x_pow /= x;
    const double term = a * inv_x_pow;
    if (std::abs(term) > std::abs(prev)) break;  // series starts diverging
    switch (k % 4) {
      case 0: p += term; break;
      case 1: q += term; break;
      case 2: p -= term; break;
      default: q -= term; break;
    }
    prev = term;
    if (std::abs(term) < 1e-17) break;
  }
  const double chi = x - 0.25 * kPi;
  const Complex amp = std::sqrt(2.0 / (kPi * x)) * Complex(p, q);
  return amp * Complex(std::cos(chi), std::sin(chi));
}

}  // namespace detail

double bessel_j0(double x) {
  require_finite(x, "bessel_j0");
  if (x < 0.0) throw DomainError("bessel_j0: negative argument");
  if (x < kBesselSwitch) return detail::j0_series(x);
  return detail::hankel1_0_asymptotic(x).real();
}

double bessel_y0(double x) {
  require_finite(x, "bessel_y0");
  if (x <= 0.0) throw DomainError("bessel_y0: argument must be positive");
  if (x < kBesselSwitch) return detail::y0_series(x);
  return detail::hankel1_0_asymptotic(x).imag();
}

Complex hankel1_0(double x) {
  require_finite(x, "hankel1_0");
  if (x <= 0.0) throw DomainError("hankel1_0: argument must be positive");
  if (x < kBesselSwitch) return {detail::j0_series(x), detail::y0_series(x)};
  return detail::hankel1_0_asymptotic(x);
}

Complex green_radial(double k, double r, int dim) {
  if (r <= 0.0) throw SingularityError("green: coincident points");
  if (dim == 2) return Complex(0.0, 0.25) * hankel1_0(k * r);
  if (dim == 3) {
    const double kr = k * r;
    return Complex(std::cos(kr), std::sin(kr)) / (4.0 * kPi * r);
  }
  throw std::invalid_argument("green: dim must be 2 or 3");
}

Complex green(double k, const Point& x, const Point& y, int dim) {
  const double dx = x[0] - y[0];
  const double dy = x[1] - y[1];
  const double dz = dim == 3 ? x[2] - y[2] : 0.0;
  return green_radial(k, std::sqrt(dx * dx + dy * dy + dz * dz), dim);
}

Complex green_cell_average(double k, double h, int dim, int nodes) {
  if (!(h > 0.0) || !(k > 0.0)) throw std::invalid_argument("green_cell_average: k, h must be positive");
  if (nodes < 2 || nodes % 2 != 0) throw std::invalid_argument("green_cell_average: node count must be even");
  const GaussRule rule = gauss_legendre_unit(nodes);
  const double a = 0.5 * h;
  Complex sum = 0.0;
  if (dim == 2) {
    // Triangle with apex at the origin and base on x = a: (x, y) = a t (1, s),
    // s in [-1, 1], Jacobian a^2 t. t = u^2 smooths the t log t endpoint.
    for (int i = 0; i < nodes; ++i) {
      const double u = rule.nodes[i];
      const double t = u * u;
      for (int j = 0; j < nodes; ++j) {
        const double s = 2.0 * rule.nodes[j] - 1.0;
        const double r = a * t * std::sqrt(1.0 + s * s);
        sum += rule.weights[i] * rule.weights[j] * (2.0 * u) * 2.0 * a * a * t * green_radial(k, r, 2);
      }
    }
    return 4.0 * sum / (h * h);
  }
  if (dim == 3) {
    // Pyramid with apex at the origin and base on z = a: x = a t (u, v, 1),
    // Jacobian a^3 t^2, which cancels the 1/r singularity.
    for (int i = 0; i < nodes; ++i) {
      const double t = rule.nodes[i];
      for (int j = 0; j < nodes; ++j) {
        const double u = 2.0 * rule.nodes[j] - 1.0;
        for (int l = 0; l < nodes; ++l) {
          const double v = 2.0 * rule.nodes[l] - 1.0;
          const double rho = std::sqrt(1.0 + u * u + v * v);
          const double kr = k * a * t * rho;
          const Complex val = a * a * t * Complex(std::cos(kr), std::sin(kr)) / (4.0 * kPi * rho);
          sum += rule.weights[i] * rule.weights[j] * rule.weights[l] * 4.0 * val;
        }
      }
    }
    return 6.0 * sum / (h * h * h);
  }
  throw std::invalid_argument("green_cell_average: dim must be 2 or 3");
}

Complex green_diag(double k, double h, int dim) {
  if (k * h >= kPi) {
    std::cerr << "warning: green_diag: k*h = " << k * h << " is not sub-wavelength\n";
  }
  const int max_nodes = dim == 2 ? 1024 : 256;
  Complex prev = green_cell_average(k, h, dim, 16);
  for (int n = 32; n <= max_nodes; n *= 2) {
    const Complex next = green_cell_average(k, h, dim, n);
    if (std::abs(next - prev) < 1e-8 * std::abs(next)) return next;
    prev = next;
  }
  throw SolverError("green_diag: self-cell quadrature did not converge", 0.0);
}

}  // namespace imsp
