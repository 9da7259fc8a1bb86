#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "imsp/grid.hpp"

namespace imsp {

struct ForwardOptions {
  /// Supports larger than this go through restarted GMRES instead of LU.
  std::size_t gmres_threshold = 5000;
  int gmres_restart = 50;
  double gmres_tolerance = 1e-10;
  /// Required ||M I - rhs||_inf / ||rhs||_inf after a direct solve. The
  /// GMRES path checks its own 2-norm tolerance instead.
  double residual_tolerance = 1e-10;
};

/// Mid-point discretization of the induced-current equation
///   I_p - eta_p sum_q G_pq I_q h^dim = eta_p u_inc(x_p)
/// restricted to the support {eta != 0}. The matrix is assembled and
/// factorized once; solve() can then be called for any number of waves.
class ForwardSolver {
 public:
  ForwardSolver(const RealField& eta, double k, ForwardOptions options = {});

  /// Induced current on the full grid, exactly zero off the support.
  ComplexField solve(const IncidentWave& wave) const;

  const UniformGrid& grid() const noexcept { return grid_; }
  const std::vector<std::size_t>& support() const noexcept { return support_; }
  const Eigen::MatrixXcd& matrix() const noexcept { return matrix_; }
  Complex self_term() const noexcept { return self_term_; }
  double k() const noexcept { return k_; }
  /// Reciprocal condition estimate of the LU factorization (1 when the
  /// support is empty, 0 on the GMRES path).
  double rcond() const noexcept { return rcond_; }
  bool uses_gmres() const noexcept { return use_gmres_; }

 private:
  Eigen::VectorXcd right_hand_side(const IncidentWave& wave) const;

  UniformGrid grid_;
  double k_;
  ForwardOptions options_;
  std::vector<std::size_t> support_;
  std::vector<Point> points_;
  std::vector<double> eta_;
  Complex self_term_;
  Eigen::MatrixXcd matrix_;
  Eigen::PartialPivLU<Eigen::MatrixXcd> lu_;
  double rcond_ = 1.0;
  bool use_gmres_ = false;
};

ComplexField solve_induced_current(const RealField& eta, const IncidentWave& wave, ForwardOptions options = {});

/// u^s(x_m) = sum over support cells of G(x_m, y_j) I_j h^dim. Throws
/// GeometryError if a receiver lies within h of a support cell centre.
std::vector<Complex> scattered_field(const ComplexField& current, const ReceiverSet& receivers, double k);

/// u_inc + sum_j G(x_p, y_j) I_j h^dim on the cells of `subdomain` (zero
/// elsewhere), using the self-cell value of G where x_p = y_j. The subdomain
/// must live on the current's grid.
ComplexField total_field_on(const SubdomainMask& subdomain, const ComplexField& current, const IncidentWave& wave);

/// Scattered-field samples on the receivers, one vector per incident wave.
struct MeasurementSet {
  double k = 0.0;
  ReceiverSet receivers;
  std::vector<Point> directions;
  std::vector<std::vector<Complex>> data;
  double noise = 0.0;
  std::optional<std::uint64_t> seed;

  std::size_t waves() const noexcept { return data.size(); }
  std::vector<IncidentWave> incident_waves() const;
};

/// Solves the forward problem for every wave and records u^s on the receivers.
MeasurementSet simulate(const RealField& eta, std::span<const IncidentWave> waves, const ReceiverSet& receivers,
                        ForwardOptions options = {});

/// u_delta = u + eps * zeta * max_m |u(x_m)| per wave, with zeta having
/// independent N(0,1) real and imaginary parts. Draws come from a
/// std::mt19937_64 seeded with `seed`, in wave-major, receiver-major order,
/// real part before imaginary part. eps == 0 returns the input unchanged.
MeasurementSet add_noise(const MeasurementSet& data, double eps, std::uint64_t seed);

}  // namespace imsp
