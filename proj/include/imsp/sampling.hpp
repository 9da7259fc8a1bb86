#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "imsp/forward.hpp"
#include "imsp/grid.hpp"

namespace imsp {

/// Direct-sampling index on a sampling grid. `components` holds the per-wave
/// indices that were combined into `phi` (just one for a single wave).
struct IndexField {
  RealField phi;
  std::vector<RealField> components;
};

/// Phi(x_p) = |<u^s, G(., x_p)>| / (|u^s| |G(., x_p)|) with unit receiver
/// weights, for every cell centre of `grid`. Throws std::invalid_argument
/// ("empty field") when the data vanish identically.
IndexField index_phi(const ReceiverSet& receivers, std::span<const Complex> data, const UniformGrid& grid, double k);

/// One index per wave of the measurement set.
std::vector<IndexField> index_phi(const MeasurementSet& data, const UniformGrid& grid);

/// Pointwise maximum over the waves' indices.
IndexField combine_indices(std::span<const IndexField> fields);

enum class SupportMode {
  Threshold,  ///< exactly {Phi >= mu max Phi}
  Box,        ///< each face-connected component replaced by its bounding box,
              ///< grown to a minimum width (and optionally cut to a maximum)
};

struct SupportOptions {
  SupportMode mode = SupportMode::Box;
  double min_box_width = 0.4;
  /// Boxes wider than this are cut down about their centre; 0 means no cap.
  double max_box_width = 0.0;
};

/// D = {Phi >= mu max Phi}, optionally in box mode. mu must lie in (0, 1].
SubdomainMask extract_support(const IndexField& phi, double mu, const SupportOptions& options = {});

/// Phi restricted to D, zero elsewhere.
RealField initial_guess(const IndexField& phi, const SubdomainMask& subdomain);

/// Face-connected components of a boolean cell mask, each a sorted list of
/// linear indices; components are ordered by their smallest index.
std::vector<std::vector<std::size_t>> connected_components(const UniformGrid& grid,
                                                           const std::vector<std::uint8_t>& mask);

struct Peak {
  Point location;
  double value = 0.0;
  std::size_t cell = 0;
};

/// Local maxima (over the full 3^dim - 1 neighbourhood) with value at least
/// min_fraction * max, thinned greedily from the highest so that retained
/// peaks are more than min_separation apart. Sorted by decreasing value.
std::vector<Peak> find_peaks(const RealField& field, double min_fraction, double min_separation);

}  // namespace imsp
