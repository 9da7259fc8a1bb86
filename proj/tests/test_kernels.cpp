// The OpenMP kernels must reproduce the serial reference bit for bit.

#include <random>
#include <vector>

#include "doctest.h"
#include "imsp/kernels.hpp"

using namespace imsp;

namespace {

std::vector<Point> random_points(std::mt19937_64& rng, std::size_t n, int dim, double spread) {
  std::uniform_real_distribution<double> u(-spread, spread);
  std::vector<Point> out(n);
  for (auto& p : out) p = {u(rng), u(rng), dim == 3 ? u(rng) : 0.0};
  return out;
}

std::vector<Complex> random_complex(std::mt19937_64& rng, std::size_t n) {
  std::normal_distribution<double> g;
  std::vector<Complex> out(n);
  for (auto& z : out) z = {g(rng), g(rng)};
  return out;
}

}  // namespace

TEST_CASE("forward matrix") {
  std::mt19937_64 rng(1);
  for (int dim : {2, 3}) {
    const auto pts = random_points(rng, 157, dim, 1.0);
    std::vector<double> eta(pts.size());
    std::uniform_real_distribution<double> u(0.1, 2.0);
    for (double& e : eta) e = u(rng);
    const Complex self(0.3, -0.7);
    const auto par = kernels::assemble_forward_matrix(pts, eta, 6.0, dim, 1e-4, self);
    const auto ser = kernels::serial::assemble_forward_matrix(pts, eta, 6.0, dim, 1e-4, self);
    CHECK(par == ser);
  }
}

TEST_CASE("potential evaluation") {
  std::mt19937_64 rng(2);
  for (int dim : {2, 3}) {
    const auto src = random_points(rng, 90, dim, 1.0);
    const auto tgt = random_points(rng, 61, dim, 3.0);
    const auto q = random_complex(rng, src.size());
    CHECK(kernels::evaluate_potential(tgt, src, q, 5.0, dim) == kernels::serial::evaluate_potential(tgt, src, q, 5.0, dim));

    // Targets on the sources, with the self term substituted.
    std::vector<std::ptrdiff_t> self(src.size());
    for (std::size_t i = 0; i < self.size(); ++i) self[i] = static_cast<std::ptrdiff_t>(i);
    const Complex st(1.5, 0.25);
    CHECK(kernels::evaluate_potential(src, src, q, 5.0, dim, self, st) ==
          kernels::serial::evaluate_potential(src, src, q, 5.0, dim, self, st));
  }
}

TEST_CASE("sampling index") {
  std::mt19937_64 rng(3);
  for (int dim : {2, 3}) {
    const auto rec = random_points(rng, 40, dim, 5.0);
    const auto data = random_complex(rng, rec.size());
    const auto samples = random_points(rng, 500, dim, 1.0);
    const auto par = kernels::sampling_index(rec, data, samples, 6.0, dim);
    const auto ser = kernels::serial::sampling_index(rec, data, samples, 6.0, dim);
    CHECK(par == ser);
    for (double v : par) {
      CHECK(v >= 0.0);
      CHECK(v <= 1.0);
    }
  }
}

TEST_CASE("linearized operator") {
  std::mt19937_64 rng(4);
  for (int dim : {2, 3}) {
    const auto rec = random_points(rng, 30, dim, 5.0);
    const auto cells = random_points(rng, 120, dim, 1.0);
    std::vector<std::vector<Complex>> uhat{random_complex(rng, cells.size()), random_complex(rng, cells.size())};
    CHECK(kernels::assemble_linearized(rec, cells, uhat, 6.0, dim, 4e-4) ==
          kernels::serial::assemble_linearized(rec, cells, uhat, 6.0, dim, 4e-4));
  }
}
