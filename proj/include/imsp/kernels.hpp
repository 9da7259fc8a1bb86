#pragma once

// Hot loops of the forward, sampling and linearization stages. Each kernel
// exists twice: an OpenMP version in imsp::kernels and a plain serial
// reference in imsp::kernels::serial with the same signature. Every output
// entry is computed by exactly one thread in a fixed summation order, so the
// two agree bit for bit; tests rely on that.

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "imsp/special.hpp"

namespace imsp::kernels {

/// M[p,q] = delta_pq - eta_p * G(x_p, x_q) * w, with G(x_p, x_p) := self_term.
Eigen::MatrixXcd assemble_forward_matrix(std::span<const Point> points, std::span<const double> eta,
                                         double k, int dim, double w, Complex self_term);

/// out[t] = sum_s G(target_t, source_s) * charge_s. When `self_index` is
/// non-empty, self_index[t] names the source coinciding with target t (or -1)
/// and that term uses self_term instead of G.
std::vector<Complex> evaluate_potential(std::span<const Point> targets, std::span<const Point> sources,
                                        std::span<const Complex> charges, double k, int dim,
                                        std::span<const std::ptrdiff_t> self_index = {},
                                        Complex self_term = {});

/// Normalized correlation |<u, G(., x_p)>| / (|u| |G(., x_p)|) over the
/// receivers for every sample point x_p, clamped into [0, 1].
std::vector<double> sampling_index(std::span<const Point> receivers, std::span<const Complex> data,
                                   std::span<const Point> samples, double k, int dim);

/// Rows (wave i, receiver m), columns j: G(x_m, y_j) * uhat[i][j] * w.
Eigen::MatrixXcd assemble_linearized(std::span<const Point> receivers, std::span<const Point> cells,
                                     const std::vector<std::vector<Complex>>& uhat, double k, int dim,
                                     double w);

namespace serial {

Eigen::MatrixXcd assemble_forward_matrix(std::span<const Point> points, std::span<const double> eta,
                                         double k, int dim, double w, Complex self_term);
std::vector<Complex> evaluate_potential(std::span<const Point> targets, std::span<const Point> sources,
                                        std::span<const Complex> charges, double k, int dim,
                                        std::span<const std::ptrdiff_t> self_index = {},
                                        Complex self_term = {});
std::vector<double> sampling_index(std::span<const Point> receivers, std::span<const Complex> data,
                                   std::span<const Point> samples, double k, int dim);
Eigen::MatrixXcd assemble_linearized(std::span<const Point> receivers, std::span<const Point> cells,
                                     const std::vector<std::vector<Complex>>& uhat, double k, int dim,
                                     double w);

}  // namespace serial

}  // namespace imsp::kernels
