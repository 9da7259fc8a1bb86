#include "imsp/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "imsp/kernels.hpp"

namespace imsp {

IndexField index_phi(const ReceiverSet& receivers, std::span<const Complex> data, const UniformGrid& grid, double k) {
  if (data.size() != receivers.points.size()) throw std::invalid_argument("index_phi: data/receiver size mismatch");
  if (receivers.dim != grid.dim) throw std::invalid_argument("index_phi: dimension mismatch");
  if (std::all_of(data.begin(), data.end(), [](const Complex& u) { return u == Complex(0.0, 0.0); })) {
    throw std::invalid_argument("index_phi: empty field");
  }
  std::vector<Point> samples(grid.size());
  for (std::size_t c = 0; c < grid.size(); ++c) samples[c] = grid.center(c);
  IndexField out;
  out.phi = RealField(grid, kernels::sampling_index(receivers.points, data, samples, k, grid.dim));
  out.components.push_back(out.phi);
  return out;
}

std::vector<IndexField> index_phi(const MeasurementSet& data, const UniformGrid& grid) {
  std::vector<IndexField> out;
  out.reserve(data.waves());
  for (const auto& wave : data.data) out.push_back(index_phi(data.receivers, wave, grid, data.k));
  return out;
}

IndexField combine_indices(std::span<const IndexField> fields) {
  if (fields.empty()) throw std::invalid_argument("combine_indices: no fields");
  IndexField out;
  out.phi = fields.front().phi;
  for (const IndexField& f : fields) {
    if (!(f.phi.grid == out.phi.grid)) throw std::invalid_argument("combine_indices: grid mismatch");
  }
  for (const IndexField& f : fields.subspan(1)) {
    for (std::size_t c = 0; c < out.phi.values.size(); ++c) {
      out.phi.values[c] = std::max(out.phi.values[c], f.phi.values[c]);
    }
  }
  for (const IndexField& f : fields) {
    out.components.insert(out.components.end(), f.components.begin(), f.components.end());
  }
  return out;
}

std::vector<std::vector<std::size_t>> connected_components(const UniformGrid& grid,
                                                           const std::vector<std::uint8_t>& mask) {
  std::vector<std::vector<std::size_t>> components;
  std::vector<std::uint8_t> seen(mask.size(), 0);
  std::vector<std::size_t> stack;
  for (std::size_t start = 0; start < mask.size(); ++start) {
    if (!mask[start] || seen[start]) continue;
    std::vector<std::size_t> comp;
    stack.push_back(start);
    seen[start] = 1;
    while (!stack.empty()) {
      const std::size_t c = stack.back();
      stack.pop_back();
      comp.push_back(c);
      const auto idx = grid.multi_index(c);
      for (int a = 0; a < grid.dim; ++a) {
        for (int step : {-1, 1}) {
          auto n = idx;
          n[a] += step;
          if (n[a] < 0 || n[a] >= grid.counts[a]) continue;
          const std::size_t nl = grid.linear_index(n);
          if (mask[nl] && !seen[nl]) {
            seen[nl] = 1;
            stack.push_back(nl);
          }
        }
      }
    }
    std::sort(comp.begin(), comp.end());
    components.push_back(std::move(comp));
  }
  return components;
}

SubdomainMask extract_support(const IndexField& phi, double mu, const SupportOptions& options) {
  if (!(mu > 0.0 && mu <= 1.0)) throw std::invalid_argument("extract_support: mu must lie in (0, 1]");
  const RealField& f = phi.phi;
  const UniformGrid& grid = f.grid;
  const double peak = *std::max_element(f.values.begin(), f.values.end());
  if (!(peak > 0.0)) throw std::invalid_argument("extract_support: index field is identically zero");
  const double cut = mu * peak;
  std::vector<std::uint8_t> mask(f.values.size(), 0);
  for (std::size_t c = 0; c < mask.size(); ++c) mask[c] = f.values[c] >= cut ? 1 : 0;
  if (options.mode == SupportMode::Threshold) return SubdomainMask(grid, std::move(mask));

  const int min_cells = static_cast<int>(std::lround(options.min_box_width / grid.h));
  const int max_cells = options.max_box_width > 0.0
                            ? std::max(1, static_cast<int>(std::lround(options.max_box_width / grid.h)))
                            : std::numeric_limits<int>::max();
  if (max_cells < min_cells) throw std::invalid_argument("extract_support: maximum box width below the minimum");
  std::vector<std::uint8_t> boxes(mask.size(), 0);
  for (const auto& comp : connected_components(grid, mask)) {
    std::array<int, 3> lo{0, 0, 0};
    std::array<int, 3> hi{0, 0, 0};
    for (int a = 0; a < grid.dim; ++a) {
      lo[a] = grid.counts[a];
      hi[a] = -1;
    }
    for (std::size_t c : comp) {
      const auto idx = grid.multi_index(c);
      for (int a = 0; a < grid.dim; ++a) {
        lo[a] = std::min(lo[a], idx[a]);
        hi[a] = std::max(hi[a], idx[a]);
      }
    }
    for (int a = 0; a < grid.dim; ++a) {
      const int extent = hi[a] - lo[a] + 1;
      if (extent >= min_cells && extent <= max_cells) continue;
      // Resize symmetrically about the box centre, then shift back inside.
      const int n = std::min(std::clamp(extent, min_cells, max_cells), grid.counts[a]);
      const double mid = 0.5 * (lo[a] + hi[a] + 1);
      int new_lo = static_cast<int>(std::lround(mid - 0.5 * n));
      new_lo = std::clamp(new_lo, 0, grid.counts[a] - n);
      lo[a] = new_lo;
      hi[a] = new_lo + n - 1;
    }
    std::array<int, 3> idx{0, 0, 0};
    for (idx[0] = lo[0]; idx[0] <= hi[0]; ++idx[0]) {
      for (idx[1] = lo[1]; idx[1] <= hi[1]; ++idx[1]) {
        for (idx[2] = lo[2]; idx[2] <= hi[2]; ++idx[2]) boxes[grid.linear_index(idx)] = 1;
      }
    }
  }
  return SubdomainMask(grid, std::move(boxes));
}

RealField initial_guess(const IndexField& phi, const SubdomainMask& subdomain) {
  if (!(phi.phi.grid == subdomain.grid())) throw std::invalid_argument("initial_guess: grid mismatch");
  RealField out(phi.phi.grid, 0.0);
  for (std::size_t c : subdomain.cells()) out.values[c] = phi.phi.values[c];
  return out;
}

std::vector<Peak> find_peaks(const RealField& field, double min_fraction, double min_separation) {
  const UniformGrid& grid = field.grid;
  const auto& v = field.values;
  if (v.empty()) return {};
  const double top = *std::max_element(v.begin(), v.end());
  std::vector<Peak> candidates;
  for (std::size_t c = 0; c < v.size(); ++c) {
    if (v[c] < min_fraction * top) continue;
    const auto idx = grid.multi_index(c);
    bool is_max = true;
    const int dz = grid.dim == 3 ? 1 : 0;
    for (int a = -1; a <= 1 && is_max; ++a) {
      for (int b = -1; b <= 1 && is_max; ++b) {
        for (int e = -dz; e <= dz && is_max; ++e) {
          if (a == 0 && b == 0 && e == 0) continue;
          const std::array<int, 3> n{idx[0] + a, idx[1] + b, idx[2] + e};
          bool inside = true;
          for (int ax = 0; ax < grid.dim; ++ax) inside = inside && n[ax] >= 0 && n[ax] < grid.counts[ax];
          if (!inside) continue;
          const std::size_t nl = grid.linear_index(n);
          // Ties are broken by index so a flat plateau yields one peak.
          if (v[nl] > v[c] || (v[nl] == v[c] && nl < c)) is_max = false;
        }
      }
    }
    if (is_max) candidates.push_back({grid.center(c), v[c], c});
  }
  std::stable_sort(candidates.begin(), candidates.end(),
                   [](const Peak& a, const Peak& b) { return a.value > b.value; });
  std::vector<Peak> kept;
  for (const Peak& p : candidates) {
    bool far = true;
    for (const Peak& q : kept) {
      double d2 = 0.0;
      for (int a = 0; a < grid.dim; ++a) d2 += (p.location[a] - q.location[a]) * (p.location[a] - q.location[a]);
      if (std::sqrt(d2) <= min_separation) far = false;
    }
    if (far) kept.push_back(p);
  }
  return kept;
}

}  // namespace imsp
