#include <cmath>
#include <complex>
#include <numbers>
#include <random>

#include "doctest.h"
#include "imsp/error.hpp"
#include "imsp/special.hpp"

using namespace imsp;

namespace {

constexpr double kPi = std::numbers::pi;

// Oracle: power series summed in long double. Good to ~1e-12 up to x = 25.
long double j0_oracle(long double x) {
  const long double q = -x * x / 4.0L;
  long double term = 1.0L, sum = 1.0L;
  for (int m = 1; m < 400; ++m) {
    term *= q / (static_cast<long double>(m) * m);
    sum += term;
    if (std::fabs(term) < 1e-22L && m > x) break;
  }
  return sum;
}

// Y0 = (2/pi) [ (ln(x/2) + gamma) J0 + sum_{m>=1} (-1)^{m+1} H_m (x^2/4)^m / (m!)^2 ]
long double y0_oracle(long double x) {
  const long double q = x * x / 4.0L;
  long double term = 1.0L, harmonic = 0.0L, tail = 0.0L;
  for (int m = 1; m < 400; ++m) {
    term *= q / (static_cast<long double>(m) * m);
    harmonic += 1.0L / m;
    const long double t = (m % 2 ? 1.0L : -1.0L) * harmonic * term;
    tail += t;
    if (std::fabs(t) < 1e-22L && m > x) break;
  }
  const long double gamma = 0.57721566490153286060651209L;
  return 2.0L / std::numbers::pi_v<long double> * ((std::log(x / 2.0L) + gamma) * j0_oracle(x) + tail);
}

double j0_ref(double x) { return x <= 25.0 ? static_cast<double>(j0_oracle(x)) : std::cyl_bessel_j(0.0, x); }
double y0_ref(double x) { return x <= 25.0 ? static_cast<double>(y0_oracle(x)) : std::cyl_neumann(0.0, x); }

// Bisection on the oracle, for the first zeros.
double bisect(double (*f)(double), double lo, double hi) {
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (f(lo) * f(mid) <= 0.0 ? hi : lo) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

TEST_CASE("J0 reference values") {
  CHECK(bessel_j0(0.0) == 1.0);
  CHECK(bessel_j0(1.0) == doctest::Approx(0.7651976866).epsilon(1e-10));
  const double zero = bisect([](double x) { return static_cast<double>(j0_oracle(x)); }, 2.0, 3.0);
  CHECK(zero == doctest::Approx(2.4048255577).epsilon(1e-10));
  CHECK(std::abs(bessel_j0(2.4048255577)) < 1e-7);
  CHECK_THROWS_AS(bessel_j0(-1.0), DomainError);
  CHECK_THROWS_AS(bessel_j0(std::nan("")), DomainError);
}

TEST_CASE("Y0 reference values") {
  CHECK(bessel_y0(1.0) == doctest::Approx(0.0882569642).epsilon(1e-9));
  CHECK_THROWS_AS(bessel_y0(0.0), DomainError);
  CHECK_THROWS_AS(bessel_y0(-2.0), DomainError);
  const double zero = bisect([](double x) { return static_cast<double>(y0_oracle(x)); }, 0.5, 1.5);
  CHECK(zero == doctest::Approx(0.8935769663).epsilon(1e-9));
  CHECK(std::abs(bessel_y0(0.8935769663)) < 1e-7);
}

TEST_CASE("Hankel function") {
  const Complex h = hankel1_0(1.0);
  CHECK(h.real() == doctest::Approx(0.7651976866).epsilon(1e-9));
  CHECK(h.imag() == doctest::Approx(0.0882569642).epsilon(1e-9));
  CHECK_THROWS_AS(hankel1_0(0.0), DomainError);
  for (double x = 50.0; x <= 1000.0; x += 7.5) {
    const double amp = std::sqrt(2.0 / (kPi * x));
    CHECK(std::abs(std::abs(hankel1_0(x)) - amp) <= 0.01 * amp);
  }
}

TEST_CASE("J0 and Y0 match the oracle on (1e-8, 1e3]") {
  double worst_j = 0.0, worst_y = 0.0;
  const int n = 4000;
  for (int i = 0; i <= n; ++i) {
    const double x = std::pow(10.0, -8.0 + 11.0 * i / n);
    worst_j = std::max(worst_j, std::abs(bessel_j0(x) - j0_ref(x)));
    worst_y = std::max(worst_y, std::abs(bessel_y0(x) - y0_ref(x)));
  }
  CHECK(worst_j <= 1e-7);
  CHECK(worst_y <= 1e-7);
}

TEST_CASE("Wronskian on [0.1, 100]") {
  double worst = 0.0;
  for (double x = 0.1; x <= 100.0; x *= 1.013) {
    const double d = 1e-5 * std::max(1.0, x);
    const double j = bessel_j0(x), y = bessel_y0(x);
    const double jp = (bessel_j0(x + d) - bessel_j0(x - d)) / (2 * d);
    const double yp = (bessel_y0(x + d) - bessel_y0(x - d)) / (2 * d);
    const double w = j * yp - jp * y;
    const double expected = 2.0 / (kPi * x);
    worst = std::max(worst, std::abs(w - expected) / expected);
  }
  CHECK(worst <= 1e-6);
}

TEST_CASE("series and asymptotic branches agree at the switch") {
  const double x = kBesselSwitch;
  const Complex asym = detail::hankel1_0_asymptotic(x);
  CHECK(std::abs(detail::j0_series(x) - asym.real()) <= 1e-7);
  CHECK(std::abs(detail::y0_series(x) - asym.imag()) <= 1e-7);
  // And the public functions are continuous across it.
  CHECK(std::abs(bessel_j0(x * (1 - 1e-12)) - bessel_j0(x * (1 + 1e-12))) <= 1e-7);
  CHECK(std::abs(bessel_y0(x * (1 - 1e-12)) - bessel_y0(x * (1 + 1e-12))) <= 1e-7);
}

TEST_CASE("green function") {
  const double k = 2 * kPi;
  SUBCASE("2D value at k r = 1") {
    const Complex g = green(1.0, {0, 0, 0}, {1, 0, 0}, 2);
    CHECK(g.real() == doctest::Approx(-0.0220642).epsilon(1e-5));
    CHECK(g.imag() == doctest::Approx(0.1912994).epsilon(1e-6));
  }
  SUBCASE("coincident points") {
    CHECK_THROWS_AS(green(k, {0.1, 0.2, 0}, {0.1, 0.2, 0}, 2), SingularityError);
    CHECK_THROWS_AS(green(k, {0.1, 0.2, 0.3}, {0.1, 0.2, 0.3}, 3), SingularityError);
  }
  SUBCASE("symmetry, exactly") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(-2, 2);
    for (int i = 0; i < 500; ++i) {
      const Point x{u(rng), u(rng), u(rng)}, y{u(rng), u(rng), u(rng)};
      for (int dim : {2, 3}) CHECK(green(k, x, y, dim) == green(k, y, x, dim));
    }
  }
  SUBCASE("3D modulus is 1/(4 pi r) and decreasing") {
    double prev = std::numeric_limits<double>::infinity();
    for (double r = 0.01; r < 10.0; r *= 1.1) {
      const double m = std::abs(green(k, {0, 0, 0}, {r, 0, 0}, 3));
      CHECK(m == doctest::Approx(1.0 / (4 * kPi * r)).epsilon(1e-14));
      CHECK(m < prev);
      prev = m;
    }
  }
}

namespace {

// Oracle for the cell mean of G: the static part has a closed form, the
// remainder G - G_static is bounded and is averaged with an n^dim mid-point
// rule.
Complex cell_mean_oracle(double k, double h, int dim, int n) {
  const double a = 0.5 * h;
  Complex sum = 0.0;
  const double step = h / n;
  if (dim == 2) {
    // mean over [-a, a]^2 of -ln(r) / (2 pi)
    const double mean_log = std::log(a) + 0.5 * (std::log(2.0) - 3.0 + 0.5 * kPi);
    const Complex stat = -mean_log / (2 * kPi);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        const double x = -a + (i + 0.5) * step, y = -a + (j + 0.5) * step;
        const double r = std::hypot(x, y);
        const Complex g = Complex(0, 0.25) * Complex(std::cyl_bessel_j(0.0, k * r), std::cyl_neumann(0.0, k * r));
        sum += g + std::log(r) / (2 * kPi);
      }
    }
    return stat + sum / double(n * n);
  }
  // (1/h^3) int 1/(4 pi r) over the cell = (3 ln(2+sqrt3) - pi/2) / (4 pi h)
  const Complex stat = (3 * std::log(2 + std::sqrt(3.0)) - 0.5 * kPi) / (4 * kPi * h);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      for (int l = 0; l < n; ++l) {
        const double x = -a + (i + 0.5) * step, y = -a + (j + 0.5) * step, z = -a + (l + 0.5) * step;
        const double r = std::sqrt(x * x + y * y + z * z);
        // (e^{ikr} - 1) / (4 pi r), written to avoid cancellation.
        const double s = std::sin(0.5 * k * r);
        const Complex em1(-2 * s * s, std::sin(k * r));
        sum += em1 / (4 * kPi * r);
      }
    }
  }
  return stat + sum / (double(n) * n * n);
}

}  // namespace

TEST_CASE("green_diag against the singular-integral oracle") {
  const double k = 2 * kPi, h = 0.01;
  const Complex g2 = green_diag(k, h, 2);
  const Complex o2 = cell_mean_oracle(k, h, 2, 2000);
  CHECK(std::abs(g2 - o2) <= 1e-5 * std::abs(o2));
  const Complex g3 = green_diag(k, h, 3);
  const Complex o3 = cell_mean_oracle(k, h, 3, 400);
  CHECK(std::abs(g3 - o3) <= 1e-6 * std::abs(o3));
}

TEST_CASE("green_diag is converged in the node count") {
  const double k = 2 * kPi;
  for (double h : {0.005, 0.01, 0.04}) {
    const Complex g2 = green_diag(k, h, 2);
    CHECK(std::abs(green_cell_average(k, h, 2, 512) - g2) < 1e-8 * std::abs(g2));
    const Complex g3 = green_diag(k, h, 3);
    CHECK(std::abs(green_cell_average(k, h, 3, 128) - g3) < 1e-8 * std::abs(g3));
  }
  CHECK_THROWS(green_cell_average(k, 0.01, 2, 3));
}
