#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "imsp/error.hpp"
#include "imsp/forward.hpp"

using namespace imsp;

namespace {

constexpr double kTwoPi = 2 * std::numbers::pi;

ScattererSpec two_squares() {
  ScattererSpec s;
  s.primitives.push_back(BoxPrimitive{{-0.8, -0.7, 0}, {0.2, 0.2, 0}, 1.0});
  s.primitives.push_back(BoxPrimitive{{0.3, 0.9, 0}, {0.2, 0.2, 0}, 1.0});
  return s;
}

UniformGrid plane(double h) { return UniformGrid::covering(2, {-2, -2, 0}, {2, 2, 0}, h); }

const IncidentWave kWave(kTwoPi, {std::numbers::sqrt2 / 2, std::numbers::sqrt2 / 2, 0});

double max_rel_diff(const std::vector<Complex>& a, const std::vector<Complex>& b) {
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    num = std::max(num, std::abs(a[i] - b[i]));
    den = std::max(den, std::abs(b[i]));
  }
  return num / den;
}

}  // namespace

TEST_CASE("zero coefficient") {
  const RealField eta(plane(0.05), 0.0);
  const ComplexField cur = solve_induced_current(eta, kWave);
  for (const Complex& v : cur.values) CHECK(v == Complex(0, 0));
  const auto us = scattered_field(cur, make_receivers_circle({0, 0, 0}, 5, 30), kTwoPi);
  for (const Complex& v : us) CHECK(v == Complex(0, 0));

  SubdomainMask all(eta.grid, std::vector<std::uint8_t>(eta.grid.size(), 1));
  const ComplexField total = total_field_on(all, cur, kWave);
  for (std::size_t c = 0; c < total.values.size(); ++c) {
    CHECK(total.values[c] == incident_field(kWave, eta.grid.center(c)));
    CHECK(std::abs(total.values[c]) == doctest::Approx(1.0));
  }
}

TEST_CASE("one support cell in closed form") {
  for (int dim : {2, 3}) {
    const UniformGrid g = dim == 2 ? plane(0.02) : UniformGrid::covering(3, {-1, -1, -1}, {1, 1, 1}, 0.05);
    RealField eta(g, 0.0);
    const std::size_t p = g.linear_index({17, 23, dim == 3 ? 9 : 0});
    eta.values[p] = 1.7;
    const IncidentWave wave = dim == 2 ? kWave : IncidentWave(kTwoPi, {0, 0, 1});
    const ComplexField cur = solve_induced_current(eta, wave);
    const Complex gpp = green_diag(kTwoPi, g.h, dim);
    const Complex expected = 1.7 * incident_field(wave, g.center(p)) / (1.0 - 1.7 * gpp * g.cell_volume());
    CHECK(std::abs(cur.values[p] - expected) <= 1e-14 * std::abs(expected));

    // u^s is the single term w G(x, y_p).
    const ReceiverSet rec = dim == 2 ? make_receivers_circle({0, 0, 0}, 5, 7) : make_receivers_cube({0, 0, 0}, 5, 2);
    const auto us = scattered_field(cur, rec, kTwoPi);
    for (std::size_t m = 0; m < rec.points.size(); ++m) {
      CHECK(us[m] == cur.values[p] * g.cell_volume() * green(kTwoPi, rec.points[m], g.center(p), dim));
    }

    // Total field at the cell itself uses the self-cell rule.
    const SubdomainMask at_p = SubdomainMask::from_cells(g, std::vector<std::size_t>{p});
    const ComplexField total = total_field_on(at_p, cur, wave);
    const Complex want = incident_field(wave, g.center(p)) + gpp * g.cell_volume() * cur.values[p];
    CHECK(std::abs(total.values[p] - want) <= 1e-15);
  }
}

TEST_CASE("two cells against a hand-assembled 2x2 solve") {
  const UniformGrid g = plane(0.02);
  RealField eta(g, 0.0);
  const std::size_t p = g.linear_index({40, 60, 0}), q = g.linear_index({43, 58, 0});
  eta.values[p] = 1.0;
  eta.values[q] = 2.5;
  const ComplexField cur = solve_induced_current(eta, kWave);

  // Oracle: Cramer's rule on
  //   [1 - e_p g0 w,   -e_p G w ] [I_p]   [e_p u_p]
  //   [ -e_q G w,   1 - e_q g0 w] [I_q] = [e_q u_q]
  const double w = g.h * g.h;
  const Complex g0 = green_diag(kTwoPi, g.h, 2);
  const Point xp = g.center(p), xq = g.center(q);
  const double r = std::hypot(xp[0] - xq[0], xp[1] - xq[1]);
  const Complex gpq = Complex(0, 0.25) * Complex(std::cyl_bessel_j(0.0, kTwoPi * r), std::cyl_neumann(0.0, kTwoPi * r));
  const double ep = 1.0, eq = 2.5;
  const Complex a11 = 1.0 - ep * g0 * w, a12 = -ep * gpq * w, a21 = -eq * gpq * w, a22 = 1.0 - eq * g0 * w;
  const Complex b1 = ep * incident_field(kWave, xp), b2 = eq * incident_field(kWave, xq);
  const Complex det = a11 * a22 - a12 * a21;
  const Complex ip = (b1 * a22 - a12 * b2) / det;
  const Complex iq = (a11 * b2 - a21 * b1) / det;
  CHECK(std::abs(cur.values[p] - ip) <= 1e-12 * std::abs(ip));
  CHECK(std::abs(cur.values[q] - iq) <= 1e-12 * std::abs(iq));
}

TEST_CASE("induced current vanishes off the support and equals eta times the total field on it") {
  const RealField eta = rasterize(two_squares(), plane(0.01));
  const ComplexField cur = solve_induced_current(eta, kWave);
  std::vector<std::size_t> support;
  for (std::size_t c = 0; c < eta.values.size(); ++c) {
    if (eta.values[c] == 0.0) {
      CHECK(cur.values[c] == Complex(0, 0));
    } else {
      support.push_back(c);
    }
  }
  REQUIRE(support.size() == 800);
  const ComplexField total = total_field_on(SubdomainMask::from_cells(eta.grid, support), cur, kWave);
  double worst = 0.0;
  for (std::size_t c : support) {
    worst = std::max(worst, std::abs(eta.values[c] * total.values[c] - cur.values[c]) / std::abs(cur.values[c]));
  }
  CHECK(worst <= 1e-8);
}

TEST_CASE("linearity in the incident amplitude") {
  const RealField eta = rasterize(two_squares(), plane(0.02));
  const ForwardSolver solver(eta, kTwoPi);
  const ComplexField cur = solver.solve(kWave);
  const Complex s(0.3, -2.1);
  Eigen::VectorXcd rhs(static_cast<Eigen::Index>(solver.support().size()));
  for (std::size_t p = 0; p < solver.support().size(); ++p) {
    const std::size_t c = solver.support()[p];
    rhs(static_cast<Eigen::Index>(p)) = s * eta.values[c] * incident_field(kWave, eta.grid.center(c));
  }
  const Eigen::VectorXcd scaled = solver.matrix().partialPivLu().solve(rhs);
  double worst = 0.0;
  for (std::size_t p = 0; p < solver.support().size(); ++p) {
    const Complex want = s * cur.values[solver.support()[p]];
    worst = std::max(worst, std::abs(scaled(static_cast<Eigen::Index>(p)) - want) / std::abs(want));
  }
  CHECK(worst <= 1e-12);
}

TEST_CASE("GMRES and LU paths agree") {
  const RealField eta = rasterize(two_squares(), plane(0.01));
  const ReceiverSet rec = make_receivers_circle({0, 0, 0}, 5, 30);
  const std::vector<IncidentWave> waves{kWave};
  ForwardOptions iterative;
  iterative.gmres_threshold = 0;
  const ForwardSolver s(eta, kTwoPi, iterative);
  CHECK(s.uses_gmres());
  const auto a = simulate(eta, waves, rec);
  const auto b = simulate(eta, waves, rec, iterative);
  CHECK(max_rel_diff(b.data[0], a.data[0]) <= 1e-9);
}

TEST_CASE("self-convergence in h") {
  const ReceiverSet rec = make_receivers_circle({0, 0, 0}, 5, 30);
  const std::vector<IncidentWave> waves{kWave};
  ForwardOptions opts;
  opts.gmres_threshold = 2000;
  std::vector<std::vector<Complex>> us;
  for (double h : {0.02, 0.01, 0.005}) us.push_back(simulate(rasterize(two_squares(), plane(h)), waves, rec, opts).data[0]);
  const double d1 = max_rel_diff(us[0], us[1]);
  const double d2 = max_rel_diff(us[1], us[2]);
  CHECK(d2 <= 0.02);
  MESSAGE("differences " << d1 << ", " << d2 << ", observed order " << std::log2(d1 / d2));
  CHECK(std::log2(d1 / d2) >= 1.0);
}

TEST_CASE("receivers too close to the support") {
  const RealField eta = rasterize(two_squares(), plane(0.02));
  const ComplexField cur = solve_induced_current(eta, kWave);
  ReceiverSet rec = make_receivers_circle({0, 0, 0}, 5, 4);
  rec.points.push_back({-0.8, -0.7, 0});
  CHECK_THROWS_AS(scattered_field(cur, rec, kTwoPi), GeometryError);
}

TEST_CASE("noise") {
  const RealField eta = rasterize(two_squares(), plane(0.02));
  const auto clean = simulate(eta, std::vector<IncidentWave>{kWave, IncidentWave(kTwoPi, {1, 0, 0})},
                              make_receivers_circle({0, 0, 0}, 5, 30));

  SUBCASE("eps = 0 is the identity") {
    const auto same = add_noise(clean, 0.0, 5);
    CHECK(same.data == clean.data);
  }
  SUBCASE("fixed seed is reproducible") {
    const auto a = add_noise(clean, 0.2, 99);
    const auto b = add_noise(clean, 0.2, 99);
    CHECK(a.data == b.data);
    CHECK(a.seed == std::optional<std::uint64_t>(99));
    CHECK(add_noise(clean, 0.2, 100).data != a.data);
  }
  SUBCASE("draw order: wave-major, receiver-major, real before imaginary") {
    const auto noisy = add_noise(clean, 0.2, 1234);
    std::mt19937_64 rng(1234);
    std::normal_distribution<double> n01(0.0, 1.0);
    for (std::size_t i = 0; i < clean.waves(); ++i) {
      double top = 0.0;
      for (const Complex& u : clean.data[i]) top = std::max(top, std::abs(u));
      for (std::size_t m = 0; m < clean.data[i].size(); ++m) {
        const double re = n01(rng), im = n01(rng);
        const Complex want = clean.data[i][m] + 0.2 * Complex(re, im) * top;
        CHECK(std::abs(noisy.data[i][m] - want) <= 1e-15 * top);
      }
    }
  }
  SUBCASE("mean modulus of the perturbation is the Rayleigh mean") {
    // E|zeta| = sqrt(pi/2) for independent N(0,1) parts; over 30 receivers
    // the sample mean stays within [0.9, 1.6] with probability > 0.99.
    int inside = 0;
    const int trials = 200;
    double grand = 0.0;
    for (int seed = 0; seed < trials; ++seed) {
      const auto noisy = add_noise(clean, 0.2, static_cast<std::uint64_t>(seed));
      double top = 0.0, sum = 0.0;
      for (const Complex& u : clean.data[0]) top = std::max(top, std::abs(u));
      for (std::size_t m = 0; m < 30; ++m) sum += std::abs(noisy.data[0][m] - clean.data[0][m]) / (0.2 * top);
      const double mean = sum / 30;
      grand += mean;
      inside += mean >= 0.9 && mean <= 1.6;
    }
    CHECK(inside >= trials - 2);
    CHECK(grand / trials == doctest::Approx(std::sqrt(std::numbers::pi / 2)).epsilon(0.02));
  }
}
