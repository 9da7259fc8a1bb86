#include "imsp/forward.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>

#include <unsupported/Eigen/IterativeSolvers>

#include "imsp/error.hpp"
#include "imsp/kernels.hpp"

namespace imsp {

namespace {

double inf_norm(const Eigen::VectorXcd& v) { return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff(); }

std::string fmt_sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3e", v);
  return buf;
}

}  // namespace

ForwardSolver::ForwardSolver(const RealField& eta, double k, ForwardOptions options)
    : grid_(eta.grid), k_(k), options_(options) {
  if (!(k > 0.0)) throw std::invalid_argument("ForwardSolver: k must be positive");
  for (std::size_t c = 0; c < eta.values.size(); ++c) {
    const double v = eta.values[c];
    if (!std::isfinite(v)) throw std::invalid_argument("ForwardSolver: eta must be finite");
    if (v != 0.0) {
      support_.push_back(c);
      points_.push_back(grid_.center(c));
      eta_.push_back(v);
    }
  }
  self_term_ = support_.empty() ? Complex(0.0, 0.0) : green_diag(k_, grid_.h, grid_.dim);
  if (support_.empty()) return;

  matrix_ = kernels::assemble_forward_matrix(points_, eta_, k_, grid_.dim, grid_.cell_volume(), self_term_);
  use_gmres_ = support_.size() > options_.gmres_threshold;
  if (use_gmres_) {
    rcond_ = 0.0;
    return;
  }
  lu_.compute(matrix_);
  rcond_ = lu_.rcond();
  if (!(rcond_ > std::numeric_limits<double>::epsilon())) {
    throw SolverError("forward system is numerically singular (rcond = " + std::to_string(rcond_) + ")", rcond_);
  }
}

Eigen::VectorXcd ForwardSolver::right_hand_side(const IncidentWave& wave) const {
  Eigen::VectorXcd rhs(static_cast<Eigen::Index>(support_.size()));
  for (std::size_t p = 0; p < support_.size(); ++p) {
    rhs(static_cast<Eigen::Index>(p)) = eta_[p] * incident_field(wave, points_[p]);
  }
  return rhs;
}

ComplexField ForwardSolver::solve(const IncidentWave& wave) const {
  ComplexField out(grid_);
  if (support_.empty()) return out;
  const Eigen::VectorXcd rhs = right_hand_side(wave);
  Eigen::VectorXcd x;
  if (use_gmres_) {
    Eigen::GMRES<Eigen::MatrixXcd, Eigen::IdentityPreconditioner> gmres;
    gmres.set_restart(options_.gmres_restart);
    gmres.setTolerance(options_.gmres_tolerance);
    gmres.setMaxIterations(20 * options_.gmres_restart);
    gmres.compute(matrix_);
    x = gmres.solve(rhs);
    if (gmres.info() != Eigen::Success) {
      throw SolverError("GMRES did not converge (estimated error " + std::to_string(gmres.error()) + ")", 0.0);
    }
    // GMRES controls the 2-norm residual; check that one.
    const double rel = (rhs - matrix_ * x).norm() / rhs.norm();
    if (rel > 10.0 * options_.gmres_tolerance) {
      throw SolverError("GMRES residual " + fmt_sci(rel) + " above tolerance", 0.0);
    }
  } else {
    x = lu_.solve(rhs);
    // One step of iterative refinement if the direct solve falls short.
    const double scale = inf_norm(rhs);
    Eigen::VectorXcd r = rhs - matrix_ * x;
    if (inf_norm(r) > options_.residual_tolerance * scale) x += lu_.solve(r);
    const double residual = inf_norm(rhs - matrix_ * x);
    if (residual > options_.residual_tolerance * scale) {
      throw SolverError("forward solve residual " + fmt_sci(residual / scale) + " above tolerance", rcond_);
    }
  }
  for (std::size_t p = 0; p < support_.size(); ++p) out.values[support_[p]] = x(static_cast<Eigen::Index>(p));
  return out;
}

ComplexField solve_induced_current(const RealField& eta, const IncidentWave& wave, ForwardOptions options) {
  return ForwardSolver(eta, wave.k, options).solve(wave);
}

namespace {

struct Sources {
  std::vector<std::size_t> cells;
  std::vector<Point> points;
  std::vector<Complex> charges;
};

// Nonzero currents as point sources with weights I_j h^dim.
Sources collect_sources(const ComplexField& current) {
  Sources s;
  const double w = current.grid.cell_volume();
  for (std::size_t c = 0; c < current.values.size(); ++c) {
    if (current.values[c] != Complex(0.0, 0.0)) {
      s.cells.push_back(c);
      s.points.push_back(current.grid.center(c));
      s.charges.push_back(current.values[c] * w);
    }
  }
  return s;
}

}  // namespace

std::vector<Complex> scattered_field(const ComplexField& current, const ReceiverSet& receivers, double k) {
  if (receivers.dim != current.grid.dim) throw std::invalid_argument("scattered_field: dimension mismatch");
  const Sources src = collect_sources(current);
  const double h = current.grid.h;
  for (const Point& x : receivers.points) {
    for (const Point& y : src.points) {
      const double d = std::sqrt((x[0] - y[0]) * (x[0] - y[0]) + (x[1] - y[1]) * (x[1] - y[1]) +
                                 (x[2] - y[2]) * (x[2] - y[2]));
      if (d <= h) throw GeometryError("scattered_field: receiver lies within one cell of the support");
    }
  }
  return kernels::evaluate_potential(receivers.points, src.points, src.charges, k, current.grid.dim);
}

ComplexField total_field_on(const SubdomainMask& subdomain, const ComplexField& current, const IncidentWave& wave) {
  if (!(subdomain.grid() == current.grid)) throw std::invalid_argument("total_field_on: grid mismatch");
  const UniformGrid& grid = current.grid;
  const Sources src = collect_sources(current);
  std::vector<Point> targets;
  std::vector<std::ptrdiff_t> self_index;
  targets.reserve(subdomain.size());
  self_index.reserve(subdomain.size());
  for (std::size_t c : subdomain.cells()) {
    targets.push_back(grid.center(c));
    const auto it = std::lower_bound(src.cells.begin(), src.cells.end(), c);
    self_index.push_back(it != src.cells.end() && *it == c ? it - src.cells.begin() : -1);
  }
  const Complex self_term = src.cells.empty() ? Complex(0.0, 0.0) : green_diag(wave.k, grid.h, grid.dim);
  const std::vector<Complex> scattered =
      kernels::evaluate_potential(targets, src.points, src.charges, wave.k, grid.dim, self_index, self_term);
  ComplexField out(grid);
  for (std::size_t t = 0; t < targets.size(); ++t) {
    out.values[subdomain.cells()[t]] = incident_field(wave, targets[t]) + scattered[t];
  }
  return out;
}

std::vector<IncidentWave> MeasurementSet::incident_waves() const {
  std::vector<IncidentWave> waves;
  waves.reserve(directions.size());
  for (const Point& d : directions) waves.emplace_back(k, d);
  return waves;
}

MeasurementSet simulate(const RealField& eta, std::span<const IncidentWave> waves, const ReceiverSet& receivers,
                        ForwardOptions options) {
  if (waves.empty()) throw std::invalid_argument("simulate: at least one incident wave is required");
  const double k = waves.front().k;
  MeasurementSet out;
  out.k = k;
  out.receivers = receivers;
  const ForwardSolver solver(eta, k, options);
  for (const IncidentWave& wave : waves) {
    if (wave.k != k) throw std::invalid_argument("simulate: all waves must share one wave number");
    out.directions.push_back(wave.direction);
    out.data.push_back(scattered_field(solver.solve(wave), receivers, k));
  }
  return out;
}

MeasurementSet add_noise(const MeasurementSet& data, double eps, std::uint64_t seed) {
  if (!(eps >= 0.0)) throw std::invalid_argument("add_noise: eps must be non-negative");
  if (eps == 0.0) return data;
  MeasurementSet out = data;
  out.noise = eps;
  out.seed = seed;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (auto& wave : out.data) {
    double peak = 0.0;
    for (const Complex& u : wave) peak = std::max(peak, std::abs(u));
    for (Complex& u : wave) {
      const double re = normal(rng);
      const double im = normal(rng);
      u += eps * peak * Complex(re, im);
    }
  }
  return out;
}

}  // namespace imsp
