// Serial reference against the OpenMP kernels, on problem sizes taken from
// the built-in scenarios. Run with OMP_NUM_THREADS set to compare scaling.

#include <benchmark/benchmark.h>

#include <map>
#include <numbers>
#include <random>

#include "imsp/kernels.hpp"

using namespace imsp;

namespace {

constexpr double kK = 2 * std::numbers::pi;

struct Problem {
  std::vector<Point> cells;
  std::vector<double> eta;
  std::vector<Complex> charges;
  std::vector<Point> receivers;
  std::vector<Complex> data;
  std::vector<Point> samples;
  std::vector<std::vector<Complex>> uhat;
};

// `n` cells on a square patch of width h, 30 receivers on a circle of
// radius 5, a 200 x 200 sampling grid.
Problem make_problem(std::size_t n) {
  Problem p;
  std::mt19937_64 rng(5);
  std::normal_distribution<double> g;
  const double h = 0.01;
  const auto side = static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(n))));
  for (std::size_t i = 0; i < n; ++i) {
    p.cells.push_back({(static_cast<double>(i % side) + 0.5) * h, (static_cast<double>(i / side) + 0.5) * h, 0.0});
    p.eta.push_back(1.0);
    p.charges.emplace_back(g(rng), g(rng));
  }
  for (int m = 0; m < 30; ++m) {
    const double t = 2 * std::numbers::pi * m / 30;
    p.receivers.push_back({5 * std::cos(t), 5 * std::sin(t), 0.0});
    p.data.emplace_back(g(rng), g(rng));
  }
  for (int i = 0; i < 200; ++i) {
    for (int j = 0; j < 200; ++j) p.samples.push_back({-2 + (i + 0.5) * 0.02, -2 + (j + 0.5) * 0.02, 0.0});
  }
  p.uhat.assign(2, p.charges);
  return p;
}

const Problem& problem(std::size_t n) {
  static std::map<std::size_t, Problem> cache;
  auto it = cache.find(n);
  if (it == cache.end()) it = cache.emplace(n, make_problem(n)).first;
  return it->second;
}

template <bool Parallel>
void forward_matrix(benchmark::State& state) {
  const Problem& p = problem(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) {
    auto m = Parallel ? kernels::assemble_forward_matrix(p.cells, p.eta, kK, 2, 1e-4, Complex(0.1, 0.2))
                      : kernels::serial::assemble_forward_matrix(p.cells, p.eta, kK, 2, 1e-4, Complex(0.1, 0.2));
    benchmark::DoNotOptimize(m.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0) * state.range(0));
}

template <bool Parallel>
void potential(benchmark::State& state) {
  const Problem& p = problem(static_cast<std::size_t>(state.range(0)));
  std::vector<std::ptrdiff_t> self(p.cells.size());
  for (std::size_t i = 0; i < self.size(); ++i) self[i] = static_cast<std::ptrdiff_t>(i);
  for (auto _ : state) {
    auto v = Parallel ? kernels::evaluate_potential(p.cells, p.cells, p.charges, kK, 2, self, Complex(0.1, 0.2))
                      : kernels::serial::evaluate_potential(p.cells, p.cells, p.charges, kK, 2, self, Complex(0.1, 0.2));
    benchmark::DoNotOptimize(v.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0) * state.range(0));
}

template <bool Parallel>
void sampling(benchmark::State& state) {
  const Problem& p = problem(800);
  for (auto _ : state) {
    auto v = Parallel ? kernels::sampling_index(p.receivers, p.data, p.samples, kK, 2)
                      : kernels::serial::sampling_index(p.receivers, p.data, p.samples, kK, 2);
    benchmark::DoNotOptimize(v.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(p.samples.size() * p.receivers.size()));
}

template <bool Parallel>
void linearized(benchmark::State& state) {
  const Problem& p = problem(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) {
    auto a = Parallel ? kernels::assemble_linearized(p.receivers, p.cells, p.uhat, kK, 2, 4e-4)
                      : kernels::serial::assemble_linearized(p.receivers, p.cells, p.uhat, kK, 2, 4e-4);
    benchmark::DoNotOptimize(a.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0) * 60);
}

}  // namespace

BENCHMARK(forward_matrix<false>)->Name("forward_matrix/serial")->Arg(400)->Arg(1600)->Unit(benchmark::kMillisecond);
BENCHMARK(forward_matrix<true>)->Name("forward_matrix/omp")->Arg(400)->Arg(1600)->Unit(benchmark::kMillisecond);
BENCHMARK(potential<false>)->Name("potential/serial")->Arg(400)->Arg(1600)->Unit(benchmark::kMillisecond);
BENCHMARK(potential<true>)->Name("potential/omp")->Arg(400)->Arg(1600)->Unit(benchmark::kMillisecond);
BENCHMARK(sampling<false>)->Name("sampling_index/serial")->Unit(benchmark::kMillisecond);
BENCHMARK(sampling<true>)->Name("sampling_index/omp")->Unit(benchmark::kMillisecond);
BENCHMARK(linearized<false>)->Name("linearized/serial")->Arg(1000)->Arg(4000)->Unit(benchmark::kMillisecond);
BENCHMARK(linearized<true>)->Name("linearized/omp")->Arg(1000)->Arg(4000)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
