#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include "imsp/forward.hpp"
#include "imsp/grid.hpp"

namespace imsp {

/// Dense discretization of the linearized scattering operator on a
/// subdomain D. Rows are (wave, receiver) pairs in wave-major order, columns
/// are the cells of D in increasing linear index.
struct LinearizedOperator {
  Eigen::MatrixXcd matrix;
  /// Re(A^H A), the normal operator over real coefficients.
  Eigen::MatrixXd normal;
  int waves = 1;

  LinearizedOperator() = default;
  explicit LinearizedOperator(Eigen::MatrixXcd a, int waves = 1);

  Eigen::Index rows() const noexcept { return matrix.rows(); }
  Eigen::Index cols() const noexcept { return matrix.cols(); }
  /// Re(A^H y).
  Eigen::VectorXd adjoint(const Eigen::VectorXcd& y) const;
  Eigen::VectorXcd apply(const Eigen::VectorXd& eta) const;
};

/// Discrete -Laplacian on the cells of a subdomain: 5-point (2D) or 7-point
/// (3D) stencil over h^2 with zero Dirichlet values outside D. Symmetric
/// positive definite.
class LaplacianOperator {
 public:
  explicit LaplacianOperator(const SubdomainMask& subdomain);

  std::size_t size() const noexcept { return neighbors_.size(); }
  int dim() const noexcept { return dim_; }
  double h() const noexcept { return h_; }
  /// Quadrature weight h^dim of one cell.
  double cell_weight() const noexcept { return dim_ == 2 ? h_ * h_ : h_ * h_ * h_; }
  /// Neighbours of cell position p inside D (positions, not linear indices).
  const std::vector<Eigen::Index>& neighbors(std::size_t p) const { return neighbors_[p]; }

  Eigen::VectorXd apply(const Eigen::VectorXd& eta) const;
  Eigen::MatrixXd dense() const;
  Eigen::SparseMatrix<double> sparse() const;

 private:
  int dim_;
  double h_;
  std::vector<std::vector<Eigen::Index>> neighbors_;
};

Eigen::VectorXd apply_laplacian(const LaplacianOperator& laplacian, const Eigen::VectorXd& eta);

/// Parameters of the L1 + H1 model. alpha and beta multiply the continuum
/// integrals, so the discrete penalties carry the cell weight h^dim.
struct MixedRegConfig {
  double alpha = 0.0;
  double beta = 0.0;
  double c = 50.0;
  int max_iters = 50;
  double d_floor = 1e-12;
  /// Converged once the active set repeats and the complementarity residual
  /// is at most this.
  double complementarity_tol = 1e-8;
};

struct NewtonState {
  Eigen::VectorXd eta;
  Eigen::VectorXd lambda;
  std::vector<std::uint8_t> active;
  int iteration = 0;
  double complementarity = 0.0;
};

struct IterationRecord {
  int iteration = 0;
  std::size_t active = 0;
  std::size_t inactive = 0;
  double complementarity = 0.0;
  double stationarity = 0.0;
  double objective = 0.0;
};

struct SsnResult {
  NewtonState state;
  bool converged = false;
  int iterations = 0;
  double stationarity = 0.0;
  std::vector<IterationRecord> history;
};

/// Primal-dual active set / semi-smooth Newton solve of
///   min 1/2 |A eta - y|^2 + alpha w sum|eta| + beta/2 w eta^T L eta,
/// w = h^dim. When the data dimension is small against the inactive set the
/// reduced Newton systems go through a low-rank (Woodbury) solve, otherwise
/// a dense LDLT. Starts from zero unless initial vectors are given. Throws
/// SolverError when a reduced system is numerically singular; running out
/// of iterations is reported through `converged == false`.
SsnResult ssn_solve(const LinearizedOperator& a, const Eigen::VectorXcd& y, const LaplacianOperator& laplacian,
                    const MixedRegConfig& config, const std::optional<Eigen::VectorXd>& init_eta = std::nullopt,
                    const std::optional<Eigen::VectorXd>& init_lambda = std::nullopt);

/// sup |lambda - (lambda + c eta) / max(1, |lambda + c eta|)|.
double complementarity_residual(const Eigen::VectorXd& eta, const Eigen::VectorXd& lambda, double c);

/// sup |Re(A^H (A eta - y)) + beta w L eta + alpha w lambda|.
double stationarity_residual(const LinearizedOperator& a, const Eigen::VectorXcd& y,
                             const LaplacianOperator& laplacian, double alpha, double beta,
                             const Eigen::VectorXd& eta, const Eigen::VectorXd& lambda);

double objective(const LinearizedOperator& a, const Eigen::VectorXcd& y, const LaplacianOperator& laplacian,
                 double alpha, double beta, const Eigen::VectorXd& eta);

/// Linearizes about `init` (a coefficient on the subdomain's grid, zero off
/// D): solves the induced-current equation with eta = init for every wave,
/// evaluates the total field on D and assembles
///   A[(i, m), j] = G(x_m, y_j) uhat_i(y_j) h^dim.
LinearizedOperator build_linearized(const RealField& init, const SubdomainMask& subdomain,
                                    std::span<const IncidentWave> waves, const ReceiverSet& receivers,
                                    ForwardOptions options = {});

/// Measurement data stacked in the row order of LinearizedOperator.
Eigen::VectorXcd stack_data(const MeasurementSet& data);

/// Coefficient vector on D scattered back onto the full grid.
RealField expand(const SubdomainMask& subdomain, const Eigen::VectorXd& values);

}  // namespace imsp
