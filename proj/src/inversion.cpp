#include "imsp/inversion.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/SparseCholesky>
#include <stdexcept>
#include <string>

#include "imsp/error.hpp"
#include "imsp/kernels.hpp"

namespace imsp {

LinearizedOperator::LinearizedOperator(Eigen::MatrixXcd a, int waves_)
    : matrix(std::move(a)), waves(waves_) {
  normal = (matrix.adjoint() * matrix).real();
}

Eigen::VectorXd LinearizedOperator::adjoint(const Eigen::VectorXcd& y) const {
  if (y.size() != matrix.rows()) throw std::invalid_argument("LinearizedOperator: data size mismatch");
  return (matrix.adjoint() * y).real();
}

Eigen::VectorXcd LinearizedOperator::apply(const Eigen::VectorXd& eta) const {
  return matrix * eta.cast<Complex>();
}

LaplacianOperator::LaplacianOperator(const SubdomainMask& subdomain)
    : dim_(subdomain.grid().dim), h_(subdomain.grid().h), neighbors_(subdomain.size()) {
  const UniformGrid& grid = subdomain.grid();
  for (std::size_t p = 0; p < subdomain.size(); ++p) {
    const auto idx = grid.multi_index(subdomain.cells()[p]);
    for (int a = 0; a < dim_; ++a) {
      for (int step : {-1, 1}) {
        auto n = idx;
        n[a] += step;
        if (n[a] < 0 || n[a] >= grid.counts[a]) continue;
        const std::ptrdiff_t q = subdomain.position(grid.linear_index(n));
        if (q >= 0) neighbors_[p].push_back(static_cast<Eigen::Index>(q));
      }
    }
  }
}

Eigen::VectorXd LaplacianOperator::apply(const Eigen::VectorXd& eta) const {
  if (static_cast<std::size_t>(eta.size()) != size()) throw std::invalid_argument("LaplacianOperator: size mismatch");
  const double inv_h2 = 1.0 / (h_ * h_);
  Eigen::VectorXd out(eta.size());
  for (std::size_t p = 0; p < size(); ++p) {
    double acc = 2.0 * dim_ * eta(static_cast<Eigen::Index>(p));
    for (Eigen::Index q : neighbors_[p]) acc -= eta(q);
    out(static_cast<Eigen::Index>(p)) = acc * inv_h2;
  }
  return out;
}

Eigen::MatrixXd LaplacianOperator::dense() const {
  const auto n = static_cast<Eigen::Index>(size());
  const double inv_h2 = 1.0 / (h_ * h_);
  Eigen::MatrixXd l = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index p = 0; p < n; ++p) {
    l(p, p) = 2.0 * dim_ * inv_h2;
    for (Eigen::Index q : neighbors_[static_cast<std::size_t>(p)]) l(p, q) = -inv_h2;
  }
  return l;
}

Eigen::SparseMatrix<double> LaplacianOperator::sparse() const {
  const auto n = static_cast<Eigen::Index>(size());
  const double inv_h2 = 1.0 / (h_ * h_);
  std::vector<Eigen::Triplet<double>> t;
  t.reserve(size() * (2 * dim_ + 1));
  for (Eigen::Index p = 0; p < n; ++p) {
    t.emplace_back(p, p, 2.0 * dim_ * inv_h2);
    for (Eigen::Index q : neighbors_[static_cast<std::size_t>(p)]) t.emplace_back(p, q, -inv_h2);
  }
  Eigen::SparseMatrix<double> l(n, n);
  l.setFromTriplets(t.begin(), t.end());
  return l;
}

Eigen::VectorXd apply_laplacian(const LaplacianOperator& laplacian, const Eigen::VectorXd& eta) {
  return laplacian.apply(eta);
}

double complementarity_residual(const Eigen::VectorXd& eta, const Eigen::VectorXd& lambda, double c) {
  if (eta.size() != lambda.size()) throw std::invalid_argument("complementarity_residual: size mismatch");
  double worst = 0.0;
  for (Eigen::Index j = 0; j < eta.size(); ++j) {
    const double s = lambda(j) + c * eta(j);
    worst = std::max(worst, std::abs(lambda(j) - s / std::max(1.0, std::abs(s))));
  }
  return worst;
}

double stationarity_residual(const LinearizedOperator& a, const Eigen::VectorXcd& y,
                             const LaplacianOperator& laplacian, double alpha, double beta,
                             const Eigen::VectorXd& eta, const Eigen::VectorXd& lambda) {
  const double w = laplacian.cell_weight();
  const Eigen::VectorXd g = a.normal * eta - a.adjoint(y) + beta * w * laplacian.apply(eta) + alpha * w * lambda;
  return g.size() == 0 ? 0.0 : g.cwiseAbs().maxCoeff();
}

double objective(const LinearizedOperator& a, const Eigen::VectorXcd& y, const LaplacianOperator& laplacian,
                 double alpha, double beta, const Eigen::VectorXd& eta) {
  const double w = laplacian.cell_weight();
  const double misfit = (a.apply(eta) - y).squaredNorm();
  return 0.5 * misfit + alpha * w * eta.lpNorm<1>() + 0.5 * beta * w * eta.dot(laplacian.apply(eta));
}

namespace {

std::vector<std::uint8_t> active_set(const Eigen::VectorXd& eta, const Eigen::VectorXd& lambda, double c) {
  std::vector<std::uint8_t> active(static_cast<std::size_t>(eta.size()));
  for (Eigen::Index j = 0; j < eta.size(); ++j) {
    active[static_cast<std::size_t>(j)] = std::abs(lambda(j) + c * eta(j)) <= 1.0 ? 1 : 0;
  }
  return active;
}

Eigen::VectorXd solve_spd(const Eigen::MatrixXd& m, const Eigen::VectorXd& rhs) {
  // Blocked Cholesky first; LDLT when that breaks down.
  Eigen::LLT<Eigen::MatrixXd> llt(m);
  if (llt.info() == Eigen::Success && llt.rcond() > std::numeric_limits<double>::epsilon()) {
    Eigen::VectorXd x = llt.solve(rhs);
    x += llt.solve(rhs - m * x);
    return x;
  }
  Eigen::LDLT<Eigen::MatrixXd> ldlt(m);
  const double rcond = ldlt.info() == Eigen::Success ? ldlt.rcond() : 0.0;
  if (!(rcond > std::numeric_limits<double>::epsilon())) {
    throw SolverError("reduced Newton system is numerically singular (rcond = " + std::to_string(rcond) + ")",
                      rcond);
  }
  return ldlt.solve(rhs);
}

// Solves (B_I^T B_I + S) x = rhs with S = beta L_II + diag(shift) sparse SPD,
// through the Woodbury identity: one sparse factorization plus a dense
// system of the (small) row dimension of B. Returns false when S is not
// safely positive definite, leaving the caller to use the dense path.
bool solve_low_rank(const Eigen::MatrixXd& b_inactive, const Eigen::SparseMatrix<double>& s, const Eigen::VectorXd& rhs,
                    Eigen::VectorXd& x) {
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> chol(s);
  if (chol.info() != Eigen::Success) return false;
  const Eigen::VectorXd d = chol.vectorD();
  if (d.size() == 0) return false;
  const double dmax = d.maxCoeff();
  if (!(d.minCoeff() > 1e-13 * dmax) || !(dmax > 0.0)) return false;

  const Eigen::MatrixXd sinv_bt = chol.solve(b_inactive.transpose());
  Eigen::MatrixXd cap = b_inactive * sinv_bt;
  cap.diagonal().array() += 1.0;
  Eigen::LDLT<Eigen::MatrixXd> small(cap);
  if (small.info() != Eigen::Success || !(small.rcond() > std::numeric_limits<double>::epsilon())) return false;

  auto apply_inverse = [&](const Eigen::VectorXd& r) -> Eigen::VectorXd {
    const Eigen::VectorXd sr = chol.solve(r);
    return sr - sinv_bt * small.solve(b_inactive * sr);
  };
  x = apply_inverse(rhs);
  // One refinement step against the exact operator.
  const Eigen::VectorXd res = rhs - b_inactive.transpose() * (b_inactive * x) - s * x;
  x += apply_inverse(res);
  return true;
}

void check_inputs(const LinearizedOperator& a, const Eigen::VectorXcd& y, const LaplacianOperator& laplacian,
                  const MixedRegConfig& config) {
  if (!(config.alpha >= 0.0) || !(config.beta >= 0.0)) throw std::invalid_argument("ssn_solve: alpha, beta must be >= 0");
  if (!(config.c > 0.0)) throw std::invalid_argument("ssn_solve: c must be positive");
  if (config.max_iters < 1) throw std::invalid_argument("ssn_solve: max_iters must be >= 1");
  if (y.size() != a.rows()) throw std::invalid_argument("ssn_solve: data size mismatch");
  if (static_cast<std::size_t>(a.cols()) != laplacian.size()) {
    throw std::invalid_argument("ssn_solve: operator and Laplacian sizes differ");
  }
}

}  // namespace

SsnResult ssn_solve(const LinearizedOperator& a, const Eigen::VectorXcd& y, const LaplacianOperator& laplacian,
                    const MixedRegConfig& config, const std::optional<Eigen::VectorXd>& init_eta,
                    const std::optional<Eigen::VectorXd>& init_lambda) {
  check_inputs(a, y, laplacian, config);
  const Eigen::Index n = a.cols();
  const double w = laplacian.cell_weight();
  const double alpha = config.alpha * w;
  const double beta = config.beta * w;
  const double c = config.c;
  const Eigen::VectorXd rhs_full = a.adjoint(y);
  const Eigen::MatrixXd smooth = a.normal + beta * laplacian.dense();
  const Eigen::SparseMatrix<double> lap = laplacian.sparse();
  // N = B^T B with B = [Re A; Im A].
  Eigen::MatrixXd b(2 * a.rows(), n);
  b.topRows(a.rows()) = a.matrix.real();
  b.bottomRows(a.rows()) = a.matrix.imag();

  SsnResult result;
  NewtonState& st = result.state;
  st.eta = init_eta.value_or(Eigen::VectorXd::Zero(n));
  st.lambda = init_lambda.value_or(Eigen::VectorXd::Zero(n));
  if (st.eta.size() != n || st.lambda.size() != n) throw std::invalid_argument("ssn_solve: initial vector size mismatch");

  if (alpha == 0.0) {
    // No L1 term: a single smooth solve; lambda = sign(eta) keeps the
    // complementarity relation satisfied.
    st.eta = solve_spd(smooth, rhs_full);
    st.lambda = st.eta.unaryExpr([](double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); });
    st.active.assign(static_cast<std::size_t>(n), 0);
    st.iteration = 1;
    st.complementarity = complementarity_residual(st.eta, st.lambda, c);
    result.iterations = 1;
    result.converged = true;
    result.stationarity = stationarity_residual(a, y, laplacian, config.alpha, config.beta, st.eta, st.lambda);
    result.history.push_back({1, 0, static_cast<std::size_t>(n), st.complementarity, result.stationarity,
                              objective(a, y, laplacian, config.alpha, config.beta, st.eta)});
    return result;
  }

  std::vector<std::uint8_t> active = active_set(st.eta, st.lambda, c);
  for (int k = 0; k < config.max_iters; ++k) {
    std::vector<Eigen::Index> inactive;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (!active[static_cast<std::size_t>(j)]) inactive.push_back(j);
    }
    const auto ni = static_cast<Eigen::Index>(inactive.size());

    // Pointwise Newton coefficients on the inactive set, where |lambda + c eta| > 1.
    Eigen::VectorXd a_coef(ni);
    Eigen::VectorXd gamma(ni);
    for (Eigen::Index r = 0; r < ni; ++r) {
      const Eigen::Index j = inactive[static_cast<std::size_t>(r)];
      const double s = st.lambda(j) + c * st.eta(j);
      const double d = std::abs(s);
      const double av = st.lambda(j) / std::max(std::abs(st.lambda(j)), 1.0);
      const double bv = s > 0.0 ? 1.0 : -1.0;
      a_coef(r) = av;
      gamma(r) = c * (1.0 - av * bv) / std::max(d - 1.0, config.d_floor);
    }

    Eigen::VectorXd eta_next = Eigen::VectorXd::Zero(n);
    if (ni > 0) {
      Eigen::VectorXd rhs(ni);
      for (Eigen::Index r = 0; r < ni; ++r) {
        rhs(r) = rhs_full(inactive[static_cast<std::size_t>(r)]) - alpha * a_coef(r);
      }
      Eigen::VectorXd sol;
      bool solved = false;
      if (4 * b.rows() <= ni) {
        std::vector<Eigen::Index> pos(static_cast<std::size_t>(n), -1);
        for (Eigen::Index r = 0; r < ni; ++r) pos[static_cast<std::size_t>(inactive[static_cast<std::size_t>(r)])] = r;
        std::vector<Eigen::Triplet<double>> t;
        for (Eigen::Index r = 0; r < ni; ++r) {
          const Eigen::Index j = inactive[static_cast<std::size_t>(r)];
          t.emplace_back(r, r, alpha * gamma(r));
          for (Eigen::SparseMatrix<double>::InnerIterator it(lap, j); it; ++it) {
            const Eigen::Index q = pos[static_cast<std::size_t>(it.row())];
            if (q >= 0) t.emplace_back(q, r, beta * it.value());
          }
        }
        Eigen::SparseMatrix<double> s_ii(ni, ni);
        s_ii.setFromTriplets(t.begin(), t.end());
        Eigen::MatrixXd b_ii(b.rows(), ni);
        for (Eigen::Index r = 0; r < ni; ++r) b_ii.col(r) = b.col(inactive[static_cast<std::size_t>(r)]);
        solved = solve_low_rank(b_ii, s_ii, rhs, sol);
      }
      if (!solved) {
        Eigen::MatrixXd m(ni, ni);
        for (Eigen::Index r = 0; r < ni; ++r) {
          const Eigen::Index jr = inactive[static_cast<std::size_t>(r)];
          for (Eigen::Index s = 0; s < ni; ++s) m(r, s) = smooth(jr, inactive[static_cast<std::size_t>(s)]);
          m(r, r) += alpha * gamma(r);
        }
        sol = solve_spd(m, rhs);
      }
      for (Eigen::Index r = 0; r < ni; ++r) eta_next(inactive[static_cast<std::size_t>(r)]) = sol(r);
    }

    // Dual update: complementarity linearization on I, stationarity on A.
    Eigen::VectorXd lambda_next(n);
    const Eigen::VectorXd residual = rhs_full - smooth * eta_next;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (active[static_cast<std::size_t>(j)]) lambda_next(j) = residual(j) / alpha;
    }
    for (Eigen::Index r = 0; r < ni; ++r) {
      const Eigen::Index j = inactive[static_cast<std::size_t>(r)];
      lambda_next(j) = gamma(r) * eta_next(j) + a_coef(r);
    }

    st.eta = std::move(eta_next);
    st.lambda = std::move(lambda_next);
    st.iteration = k + 1;
    st.complementarity = complementarity_residual(st.eta, st.lambda, c);
    const double stat = stationarity_residual(a, y, laplacian, config.alpha, config.beta, st.eta, st.lambda);
    result.history.push_back({k + 1, static_cast<std::size_t>(n - ni), static_cast<std::size_t>(ni),
                              st.complementarity, stat,
                              objective(a, y, laplacian, config.alpha, config.beta, st.eta)});
    result.iterations = k + 1;
    result.stationarity = stat;

    std::vector<std::uint8_t> next_active = active_set(st.eta, st.lambda, c);
    st.active = active;
    if (next_active == active && st.complementarity <= config.complementarity_tol) {
      result.converged = true;
      break;
    }
    active = std::move(next_active);
  }
  return result;
}

LinearizedOperator build_linearized(const RealField& init, const SubdomainMask& subdomain,
                                    std::span<const IncidentWave> waves, const ReceiverSet& receivers,
                                    ForwardOptions options) {
  if (!(init.grid == subdomain.grid())) throw std::invalid_argument("build_linearized: grid mismatch");
  if (subdomain.empty()) throw std::invalid_argument("build_linearized: empty subdomain");
  if (waves.empty()) throw std::invalid_argument("build_linearized: no incident waves");
  if (receivers.dim != init.grid.dim) throw std::invalid_argument("build_linearized: dimension mismatch");
  RealField eta(init.grid, 0.0);
  for (std::size_t c : subdomain.cells()) {
    if (!std::isfinite(init.values[c])) throw std::invalid_argument("build_linearized: init must be finite");
    eta.values[c] = init.values[c];
  }
  const double k = waves.front().k;
  const ForwardSolver solver(eta, k, options);
  std::vector<Point> cells;
  cells.reserve(subdomain.size());
  for (std::size_t c : subdomain.cells()) cells.push_back(init.grid.center(c));
  std::vector<std::vector<Complex>> uhat;
  for (const IncidentWave& wave : waves) {
    const ComplexField total = total_field_on(subdomain, solver.solve(wave), wave);
    std::vector<Complex> on_d;
    on_d.reserve(subdomain.size());
    for (std::size_t c : subdomain.cells()) on_d.push_back(total.values[c]);
    uhat.push_back(std::move(on_d));
  }
  return LinearizedOperator(
      kernels::assemble_linearized(receivers.points, cells, uhat, k, init.grid.dim, init.grid.cell_volume()),
      static_cast<int>(waves.size()));
}

Eigen::VectorXcd stack_data(const MeasurementSet& data) {
  const std::size_t nr = data.receivers.points.size();
  Eigen::VectorXcd y(static_cast<Eigen::Index>(data.waves() * nr));
  for (std::size_t i = 0; i < data.waves(); ++i) {
    if (data.data[i].size() != nr) throw std::invalid_argument("stack_data: data/receiver size mismatch");
    for (std::size_t m = 0; m < nr; ++m) y(static_cast<Eigen::Index>(i * nr + m)) = data.data[i][m];
  }
  return y;
}

RealField expand(const SubdomainMask& subdomain, const Eigen::VectorXd& values) {
  if (static_cast<std::size_t>(values.size()) != subdomain.size()) throw std::invalid_argument("expand: size mismatch");
  RealField out(subdomain.grid(), 0.0);
  for (std::size_t p = 0; p < subdomain.size(); ++p) out.values[subdomain.cells()[p]] = values(static_cast<Eigen::Index>(p));
  return out;
}

}  // namespace imsp
