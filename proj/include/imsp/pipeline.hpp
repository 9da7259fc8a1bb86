#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "imsp/forward.hpp"
#include "imsp/inversion.hpp"
#include "imsp/sampling.hpp"
#include "imsp/scenario.hpp"

namespace imsp {

/// Reconstruction quality against the known scatterer, all on the inversion
/// mesh. The reconstructed support is {|eta| >= 0.5 max |eta|}.
struct Metrics {
  double jaccard = 0.0;
  /// |max eta_rec - max eta_true| / max eta_true.
  double max_error = 0.0;
  /// |eta_rec - eta_true| / |eta_true| over the cells of D (absolute when the
  /// truth vanishes on D).
  double l2_error = 0.0;
  /// Fraction of D cells outside the true support with |eta_rec| > 0.1.
  double purity = 0.0;
  /// Face-connected components of the reconstructed support.
  std::size_t components = 0;
};

Metrics compute_metrics(const RealField& eta_rec, const RealField& eta_true, const SubdomainMask& subdomain);

struct ForwardStage {
  RealField eta_true;
  MeasurementSet measurements;
};

struct SampleStage {
  std::vector<IndexField> per_wave;
  IndexField phi;
  /// Support D and Phi|_D, both on the inversion mesh.
  SubdomainMask subdomain;
  RealField init;
};

struct SearchPoint {
  RegPair pair;
  double alpha_factor = 1.0;
  double beta_factor = 1.0;
  bool solved = false;
  bool converged = false;
  int iterations = 0;
  Metrics metrics;
  bool accepted = false;
};

struct InvertStage {
  RegPair start;
  RegPair chosen;
  /// Every pair that was tried, in order; the first entry is the start pair.
  std::vector<SearchPoint> search;
  bool accepted = false;
  SsnResult result;
  RealField eta_rec;
  RealField eta_true;
  Metrics metrics;
};

struct StageTimes {
  double forward = 0.0;
  double sample = 0.0;
  double invert = 0.0;
};

struct ReconReport {
  std::string scenario;
  std::vector<Peak> peaks;
  SubdomainMask subdomain;
  InvertStage inversion;
  StageTimes times;
};

/// Multiplicative factors tried around the start pair.
const std::vector<double>& search_factors();

/// Sampling grid in effect (full_res swaps in the full-resolution width).
UniformGrid sampling_grid(const Scenario& scenario, bool full_res);
UniformGrid inversion_grid(const Scenario& scenario, bool full_res);

/// Peaks of Phi that pass the mu cut, more than 0.5 apart.
std::vector<Peak> index_peaks(const Scenario& scenario, const IndexField& phi);

// Each stage wraps failures in StageError naming the stage.
ForwardStage run_forward(const Scenario& scenario);
SampleStage run_sample(const Scenario& scenario, const MeasurementSet& measurements, bool full_res = false);
InvertStage run_invert(const Scenario& scenario, const MeasurementSet& measurements, const SubdomainMask& subdomain,
                       const RealField& init);

ReconReport run_pipeline(const Scenario& scenario, bool full_res = false);

// Artifact writers. File names:
//   eta_true.csv, measurements.csv            (forward)
//   phi_<i>.csv, phi.csv, mask.csv, init.csv  (sample)
//   eta_rec.csv, diagnostics.csv, search.csv  (invert)
//   report.txt, metrics.csv, timings.txt      (report)
void write_forward(const std::filesystem::path& dir, const ForwardStage& stage);
void write_sample(const std::filesystem::path& dir, const SampleStage& stage);
void write_invert(const std::filesystem::path& dir, const InvertStage& stage);
void write_report(const std::filesystem::path& dir, const ReconReport& report);

std::string format_report(const ReconReport& report);

}  // namespace imsp
