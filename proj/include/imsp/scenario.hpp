#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "imsp/grid.hpp"
#include "imsp/sampling.hpp"

namespace imsp {

/// Axis-aligned box [lo, hi] meshed with cells of width h.
struct MeshSpec {
  Point lo{};
  Point hi{};
  double h = 0.0;
  bool operator==(const MeshSpec&) const = default;

  UniformGrid grid(int dim) const { return UniformGrid::covering(dim, lo, hi, h); }
};

struct RegPair {
  double alpha = 0.0;
  double beta = 0.0;
  bool operator==(const RegPair&) const = default;
};

/// Acceptance thresholds used to decide whether the (alpha, beta) search
/// keeps going.
struct SearchTargets {
  bool enabled = true;
  double jaccard_exact = 0.4;
  double jaccard_noisy = 0.3;
  double max_error = 0.3;
  double purity = 0.1;
  bool operator==(const SearchTargets&) const = default;
};

struct Scenario {
  std::string name;
  int dim = 2;
  double k = 0.0;
  std::vector<Point> directions;
  ScattererSpec scatterers;
  MeshSpec forward;
  MeshSpec sampling;
  /// Sampling width used with --full-res.
  double full_res_h = 0.0;
  ReceiverGeometry receivers;
  double noise = 0.0;
  std::uint64_t seed = 42;
  double mu = 0.6;
  SupportMode support_mode = SupportMode::Box;
  double box_width = 0.4;
  /// Cap on the box width; 0 leaves boxes uncapped.
  double box_max_width = 0.0;
  /// Inversion mesh width; 0 means "same as the sampling grid".
  double inversion_h = 0.0;
  /// Explicit regularization; when absent the table pair for the noise
  /// level is used.
  std::optional<double> alpha;
  std::optional<double> beta;
  double c = 50.0;
  int max_iters = 50;
  RegPair table_exact;
  RegPair table_noisy;
  SearchTargets search;

  bool operator==(const Scenario&) const = default;

  std::vector<IncidentWave> waves() const;
  /// Starting (alpha, beta): explicit values override the table pair.
  RegPair start_pair() const;
  double inversion_width() const { return inversion_h > 0.0 ? inversion_h : sampling.h; }
};

/// Throws GeometryError / std::invalid_argument on inconsistent settings:
/// receivers must enclose the sampling domain, which must enclose every
/// scatterer.
void validate(const Scenario& scenario);

/// "section.key = value" text, one entry per line; '#' starts a comment.
/// Vectors are comma lists. Throws ParseError with the offending line and key.
Scenario parse_scenario(std::istream& is, const std::string& source = "<stream>");
Scenario load_scenario(const std::filesystem::path& path);
void write_scenario(std::ostream& os, const Scenario& scenario);

/// ex1a, ex1b, ring, cubes3d.
std::vector<std::string> builtin_scenario_names();
std::optional<Scenario> builtin_scenario(const std::string& name);

/// A built-in name or a path to a scenario file.
Scenario resolve_scenario(const std::string& name_or_path);

}  // namespace imsp
