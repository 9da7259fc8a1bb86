#include "imsp/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace imsp::kernels {

namespace {

double distance(const Point& a, const Point& b) {
  const double dx = a[0] - b[0];
  const double dy = a[1] - b[1];
  const double dz = a[2] - b[2];
  return std::sqrt(dx * dx + dy * dy + dz * dz);
}

double normalized_correlation(Complex inner, double data_norm2, double green_norm2) {
  const double den = std::sqrt(data_norm2 * green_norm2);
  if (!(den > 0.0)) return 0.0;
  return std::clamp(std::abs(inner) / den, 0.0, 1.0);
}

void check_uhat(const std::vector<std::vector<Complex>>& uhat, std::size_t cols) {
  for (const auto& u : uhat) {
    if (u.size() != cols) throw std::invalid_argument("assemble_linearized: total field size mismatch");
  }
}

}  // namespace

Eigen::MatrixXcd assemble_forward_matrix(std::span<const Point> points, std::span<const double> eta,
                                         double k, int dim, double w, Complex self_term) {
  const auto n = static_cast<Eigen::Index>(points.size());
  Eigen::MatrixXcd m(n, n);
  // G is symmetric in its arguments: evaluate each pair once.
#pragma omp parallel for schedule(dynamic, 16)
  for (Eigen::Index q = 0; q < n; ++q) {
    m(q, q) = 1.0 - eta[q] * (self_term * w);
    for (Eigen::Index p = q + 1; p < n; ++p) {
      const Complex g = green_radial(k, distance(points[p], points[q]), dim) * w;
      m(p, q) = -eta[p] * g;
      m(q, p) = -eta[q] * g;
    }
  }
  return m;
}

std::vector<Complex> evaluate_potential(std::span<const Point> targets, std::span<const Point> sources,
                                        std::span<const Complex> charges, double k, int dim,
                                        std::span<const std::ptrdiff_t> self_index, Complex self_term) {
  const auto nt = static_cast<std::ptrdiff_t>(targets.size());
  const auto ns = sources.size();
  std::vector<Complex> out(targets.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t t = 0; t < nt; ++t) {
    const std::ptrdiff_t self = self_index.empty() ? -1 : self_index[t];
    Complex acc = 0.0;
    for (std::size_t s = 0; s < ns; ++s) {
      if (static_cast<std::ptrdiff_t>(s) == self) {
        acc += self_term * charges[s];
      } else {
        acc += green_radial(k, distance(targets[t], sources[s]), dim) * charges[s];
      }
    }
    out[t] = acc;
  }
  return out;
}

std::vector<double> sampling_index(std::span<const Point> receivers, std::span<const Complex> data,
                                   std::span<const Point> samples, double k, int dim) {
  double data_norm2 = 0.0;
  for (const Complex& u : data) data_norm2 += std::norm(u);
  const auto np = static_cast<std::ptrdiff_t>(samples.size());
  const std::size_t nr = receivers.size();
  std::vector<double> out(samples.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t p = 0; p < np; ++p) {
    Complex inner = 0.0;
    double green_norm2 = 0.0;
    for (std::size_t m = 0; m < nr; ++m) {
      const Complex g = green_radial(k, distance(receivers[m], samples[p]), dim);
      inner += data[m] * std::conj(g);
      green_norm2 += std::norm(g);
    }
    out[p] = normalized_correlation(inner, data_norm2, green_norm2);
  }
  return out;
}

Eigen::MatrixXcd assemble_linearized(std::span<const Point> receivers, std::span<const Point> cells,
                                     const std::vector<std::vector<Complex>>& uhat, double k, int dim,
                                     double w) {
  check_uhat(uhat, cells.size());
  const auto nr = static_cast<Eigen::Index>(receivers.size());
  const auto nc = static_cast<Eigen::Index>(cells.size());
  const auto nw = static_cast<Eigen::Index>(uhat.size());
  Eigen::MatrixXcd a(nw * nr, nc);
  // The Green's factor is shared by all waves; column-parallel keeps each
  // entry owned by one thread.
#pragma omp parallel for schedule(static)
  for (Eigen::Index j = 0; j < nc; ++j) {
    for (Eigen::Index m = 0; m < nr; ++m) {
      const Complex g = green_radial(k, distance(receivers[m], cells[j]), dim) * w;
      for (Eigen::Index i = 0; i < nw; ++i) a(i * nr + m, j) = g * uhat[i][j];
    }
  }
  return a;
}

namespace serial {

Eigen::MatrixXcd assemble_forward_matrix(std::span<const Point> points, std::span<const double> eta,
                                         double k, int dim, double w, Complex self_term) {
  const auto n = static_cast<Eigen::Index>(points.size());
  Eigen::MatrixXcd m(n, n);
  for (Eigen::Index p = 0; p < n; ++p) {
    for (Eigen::Index q = 0; q < n; ++q) {
      const Complex g = p == q ? self_term * w : green_radial(k, distance(points[p], points[q]), dim) * w;
      m(p, q) = (p == q ? 1.0 : 0.0) - eta[p] * g;
    }
  }
  return m;
}

std::vector<Complex> evaluate_potential(std::span<const Point> targets, std::span<const Point> sources,
                                        std::span<const Complex> charges, double k, int dim,
                                        std::span<const std::ptrdiff_t> self_index, Complex self_term) {
  std::vector<Complex> out(targets.size());
  for (std::size_t t = 0; t < targets.size(); ++t) {
    const std::ptrdiff_t self = self_index.empty() ? -1 : self_index[t];
    Complex acc = 0.0;
    for (std::size_t s = 0; s < sources.size(); ++s) {
      const Complex g = static_cast<std::ptrdiff_t>(s) == self
                            ? self_term
                            : green_radial(k, distance(targets[t], sources[s]), dim);
      acc += g * charges[s];
    }
    out[t] = acc;
  }
  return out;
}

std::vector<double> sampling_index(std::span<const Point> receivers, std::span<const Complex> data,
                                   std::span<const Point> samples, double k, int dim) {
  double data_norm2 = 0.0;
  for (const Complex& u : data) data_norm2 += std::norm(u);
  std::vector<double> out;
  out.reserve(samples.size());
  for (const Point& x : samples) {
    Complex inner = 0.0;
    double green_norm2 = 0.0;
    for (std::size_t m = 0; m < receivers.size(); ++m) {
      const Complex g = green_radial(k, distance(receivers[m], x), dim);
      inner += data[m] * std::conj(g);
      green_norm2 += std::norm(g);
    }
    out.push_back(normalized_correlation(inner, data_norm2, green_norm2));
  }
  return out;
}

Eigen::MatrixXcd assemble_linearized(std::span<const Point> receivers, std::span<const Point> cells,
                                     const std::vector<std::vector<Complex>>& uhat, double k, int dim,
                                     double w) {
  check_uhat(uhat, cells.size());
  const auto nr = static_cast<Eigen::Index>(receivers.size());
  Eigen::MatrixXcd a(static_cast<Eigen::Index>(uhat.size()) * nr, static_cast<Eigen::Index>(cells.size()));
  for (std::size_t i = 0; i < uhat.size(); ++i) {
    for (Eigen::Index m = 0; m < nr; ++m) {
      for (std::size_t j = 0; j < cells.size(); ++j) {
        a(static_cast<Eigen::Index>(i) * nr + m, static_cast<Eigen::Index>(j)) =
            green_radial(k, distance(receivers[m], cells[j]), dim) * w * uhat[i][j];
      }
    }
  }
  return a;
}

}  // namespace serial

}  // namespace imsp::kernels
