#include "imsp/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "imsp/error.hpp"
#include "imsp/io.hpp"

namespace imsp {

namespace {

template <class F>
auto stage(const char* name, F&& body) {
  try {
    return body();
  } catch (const StageError&) {
    throw;
  } catch (const std::exception& e) {
    throw StageError(name, e.what());
  }
}

std::string fmt(const char* spec, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

std::string fmt_point(const Point& p, int dim) {
  std::string out = "(";
  for (int a = 0; a < dim; ++a) {
    if (a) out += ", ";
    out += fmt("%.4f", p[a]);
  }
  return out + ")";
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

Metrics compute_metrics(const RealField& eta_rec, const RealField& eta_true, const SubdomainMask& subdomain) {
  if (!(eta_rec.grid == eta_true.grid) || !(eta_rec.grid == subdomain.grid())) {
    throw std::invalid_argument("compute_metrics: grid mismatch");
  }
  Metrics m;
  const auto& rec = eta_rec.values;
  const auto& tru = eta_true.values;
  double rec_peak = 0.0;
  double rec_max = -std::numeric_limits<double>::infinity();
  double true_max = -std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < rec.size(); ++c) {
    rec_peak = std::max(rec_peak, std::abs(rec[c]));
    rec_max = std::max(rec_max, rec[c]);
    true_max = std::max(true_max, tru[c]);
  }

  std::vector<std::uint8_t> support(rec.size(), 0);
  std::size_t inter = 0, uni = 0;
  for (std::size_t c = 0; c < rec.size(); ++c) {
    const bool r = rec_peak > 0.0 && std::abs(rec[c]) >= 0.5 * rec_peak;
    const bool t = tru[c] != 0.0;
    support[c] = r ? 1 : 0;
    inter += r && t;
    uni += r || t;
  }
  m.jaccard = uni ? static_cast<double>(inter) / static_cast<double>(uni) : 1.0;
  m.max_error = true_max != 0.0 ? std::abs(rec_max - true_max) / std::abs(true_max) : std::abs(rec_max);

  double diff2 = 0.0, true2 = 0.0;
  std::size_t outside = 0, bad = 0;
  for (std::size_t c : subdomain.cells()) {
    diff2 += (rec[c] - tru[c]) * (rec[c] - tru[c]);
    true2 += tru[c] * tru[c];
    if (tru[c] == 0.0) {
      ++outside;
      bad += std::abs(rec[c]) > 0.1;
    }
  }
  m.l2_error = true2 > 0.0 ? std::sqrt(diff2 / true2) : std::sqrt(diff2);
  m.purity = outside ? static_cast<double>(bad) / static_cast<double>(outside) : 0.0;
  m.components = connected_components(eta_rec.grid, support).size();
  return m;
}

const std::vector<double>& search_factors() {
  static const std::vector<double> f{0.1, 0.2, 0.5, 1.0, 2.0, 5.0, 10.0};
  return f;
}

UniformGrid sampling_grid(const Scenario& s, bool full_res) {
  MeshSpec m = s.sampling;
  if (full_res) m.h = s.full_res_h;
  return m.grid(s.dim);
}

UniformGrid inversion_grid(const Scenario& s, bool full_res) {
  if (s.inversion_h > 0.0) {
    MeshSpec m = s.sampling;
    m.h = s.inversion_h;
    return m.grid(s.dim);
  }
  return sampling_grid(s, full_res);
}

std::vector<Peak> index_peaks(const Scenario& s, const IndexField& phi) { return find_peaks(phi.phi, s.mu, 0.5); }

ForwardStage run_forward(const Scenario& s) {
  return stage("forward", [&] {
    validate(s);
    ForwardStage out;
    out.eta_true = rasterize(s.scatterers, s.forward.grid(s.dim));
    const ReceiverSet receivers = make_receivers(s.receivers);
    const auto waves = s.waves();
    out.measurements = simulate(out.eta_true, waves, receivers);
    if (s.noise > 0.0) out.measurements = add_noise(out.measurements, s.noise, s.seed);
    return out;
  });
}

SampleStage run_sample(const Scenario& s, const MeasurementSet& measurements, bool full_res) {
  return stage("sample", [&] {
    SampleStage out;
    const UniformGrid sgrid = sampling_grid(s, full_res);
    out.per_wave = index_phi(measurements, sgrid);
    out.phi = combine_indices(out.per_wave);
    const SubdomainMask coarse = extract_support(out.phi, s.mu, {s.support_mode, s.box_width, s.box_max_width});
    const UniformGrid igrid = inversion_grid(s, full_res);
    if (igrid == sgrid) {
      out.subdomain = coarse;
      out.init = initial_guess(out.phi, coarse);
      return out;
    }
    // Different inversion width: each inversion cell takes the sampling cell
    // containing its centre.
    std::vector<std::uint8_t> mask(igrid.size(), 0);
    out.init = RealField(igrid, 0.0);
    for (std::size_t c = 0; c < igrid.size(); ++c) {
      const Point x = igrid.center(c);
      std::array<int, 3> idx{0, 0, 0};
      for (int a = 0; a < s.dim; ++a) {
        idx[a] = std::clamp(static_cast<int>(std::floor((x[a] - sgrid.origin[a]) / sgrid.h)), 0, sgrid.counts[a] - 1);
      }
      const std::size_t sc = sgrid.linear_index(idx);
      if (coarse.contains(sc)) {
        mask[c] = 1;
        out.init.values[c] = out.phi.phi.values[sc];
      }
    }
    out.subdomain = SubdomainMask(igrid, std::move(mask));
    return out;
  });
}

namespace {

bool meets(const Metrics& m, const Scenario& s) {
  const double jmin = s.noise > 0.0 ? s.search.jaccard_noisy : s.search.jaccard_exact;
  return m.jaccard >= jmin && m.max_error <= s.search.max_error && m.purity <= s.search.purity;
}

double shortfall(const Metrics& m, const Scenario& s) {
  const double jmin = s.noise > 0.0 ? s.search.jaccard_noisy : s.search.jaccard_exact;
  return std::max(0.0, (jmin - m.jaccard) / jmin) + std::max(0.0, (m.max_error - s.search.max_error) / s.search.max_error) +
         std::max(0.0, (m.purity - s.search.purity) / s.search.purity);
}

}  // namespace

InvertStage run_invert(const Scenario& s, const MeasurementSet& measurements, const SubdomainMask& subdomain,
                       const RealField& init) {
  return stage("invert", [&] {
    if (subdomain.empty()) throw std::invalid_argument("support D is empty");
    InvertStage out;
    const ReceiverSet& receivers = measurements.receivers;
    const auto waves = measurements.incident_waves();
    const LinearizedOperator a = build_linearized(init, subdomain, waves, receivers);
    const Eigen::VectorXcd y = stack_data(measurements);
    const LaplacianOperator laplacian(subdomain);
    out.eta_true = rasterize(s.scatterers, subdomain.grid());

    auto config_for = [&](const RegPair& p) {
      MixedRegConfig cfg;
      cfg.alpha = p.alpha;
      cfg.beta = p.beta;
      cfg.c = s.c;
      cfg.max_iters = s.max_iters;
      return cfg;
    };
    // Among accepted pairs prefer the one closest to the start pair; with
    // none accepted take the smallest total shortfall. Pairs are tried in
    // order of distance from the start, so the first accepted one wins.
    double best_key = std::numeric_limits<double>::infinity();
    const SearchPoint* best = nullptr;
    auto attempt = [&](double fa, double fb) {
      SearchPoint pt;
      pt.alpha_factor = fa;
      pt.beta_factor = fb;
      pt.pair = {out.start.alpha * fa, out.start.beta * fb};
      try {
        SsnResult r = ssn_solve(a, y, laplacian, config_for(pt.pair));
        pt.solved = true;
        pt.converged = r.converged;
        pt.iterations = r.iterations;
        pt.metrics = compute_metrics(expand(subdomain, r.state.eta), out.eta_true, subdomain);
        pt.accepted = meets(pt.metrics, s);
        const double dist = std::abs(std::log(fa)) + std::abs(std::log(fb));
        const double key = pt.accepted ? dist - 1e6 : shortfall(pt.metrics, s) + 1e-9 * dist;
        out.search.push_back(pt);
        if (key < best_key) {
          best_key = key;
          best = &out.search.back();
          out.result = std::move(r);
        }
      } catch (const SolverError&) {
        pt.solved = false;
        out.search.push_back(pt);
      }
      return pt.accepted;
    };

    out.start = s.start_pair();
    out.search.reserve(search_factors().size() * search_factors().size() + 1);
    if (!attempt(1.0, 1.0) && s.search.enabled) {
      std::vector<std::pair<double, double>> order;
      for (double fa : search_factors()) {
        for (double fb : search_factors()) {
          if (fa != 1.0 || fb != 1.0) order.emplace_back(fa, fb);
        }
      }
      std::stable_sort(order.begin(), order.end(), [](const auto& l, const auto& r) {
        return std::abs(std::log(l.first)) + std::abs(std::log(l.second)) <
               std::abs(std::log(r.first)) + std::abs(std::log(r.second));
      });
      for (const auto& [fa, fb] : order) {
        if (attempt(fa, fb)) break;
      }
    }
    if (!best) throw SolverError("every (alpha, beta) pair failed", 0.0);
    out.chosen = best->pair;
    out.accepted = best->accepted;
    out.eta_rec = expand(subdomain, out.result.state.eta);
    out.metrics = compute_metrics(out.eta_rec, out.eta_true, subdomain);
    return out;
  });
}

ReconReport run_pipeline(const Scenario& s, bool full_res) {
  ReconReport report;
  report.scenario = s.name;
  auto t0 = std::chrono::steady_clock::now();
  const ForwardStage fwd = run_forward(s);
  report.times.forward = seconds_since(t0);
  t0 = std::chrono::steady_clock::now();
  const SampleStage smp = run_sample(s, fwd.measurements, full_res);
  report.times.sample = seconds_since(t0);
  report.peaks = index_peaks(s, smp.phi);
  report.subdomain = smp.subdomain;
  t0 = std::chrono::steady_clock::now();
  report.inversion = run_invert(s, fwd.measurements, smp.subdomain, smp.init);
  report.times.invert = seconds_since(t0);
  return report;
}

// --- artifacts -------------------------------------------------------------

void write_forward(const std::filesystem::path& dir, const ForwardStage& st) {
  std::filesystem::create_directories(dir);
  io::save(dir / "eta_true.csv", st.eta_true);
  io::save(dir / "measurements.csv", st.measurements);
}

void write_sample(const std::filesystem::path& dir, const SampleStage& st) {
  std::filesystem::create_directories(dir);
  for (std::size_t i = 0; i < st.per_wave.size(); ++i) {
    io::save(dir / ("phi_" + std::to_string(i) + ".csv"), st.per_wave[i].phi);
  }
  io::save(dir / "phi.csv", st.phi.phi);
  io::save(dir / "mask.csv", st.subdomain);
  io::save(dir / "init.csv", st.init);
}

void write_invert(const std::filesystem::path& dir, const InvertStage& st) {
  std::filesystem::create_directories(dir);
  io::save(dir / "eta_rec.csv", st.eta_rec);
  io::save(dir / "diagnostics.csv", st.result.history);
  std::ofstream os(dir / "search.csv");
  if (!os) throw std::runtime_error("cannot write " + (dir / "search.csv").string());
  os << "alpha,beta,alpha_factor,beta_factor,solved,converged,iterations,jaccard,max_error,l2_error,purity,components,"
        "accepted\n";
  for (const SearchPoint& p : st.search) {
    os << io::format_double(p.pair.alpha) << ',' << io::format_double(p.pair.beta) << ','
       << io::format_double(p.alpha_factor) << ',' << io::format_double(p.beta_factor) << ',' << p.solved << ','
       << p.converged << ',' << p.iterations << ',' << io::format_double(p.metrics.jaccard) << ','
       << io::format_double(p.metrics.max_error) << ',' << io::format_double(p.metrics.l2_error) << ','
       << io::format_double(p.metrics.purity) << ',' << p.metrics.components << ',' << p.accepted << '\n';
  }
}

std::string format_report(const ReconReport& r) {
  const InvertStage& inv = r.inversion;
  const SubdomainMask& d = r.subdomain;
  const int dim = d.grid().dim;
  std::ostringstream os;
  os << "scenario: " << r.scenario << "\n\n";

  os << "index peaks (above the mu cut, > 0.5 apart): " << r.peaks.size() << "\n";
  for (const Peak& p : r.peaks) os << "  " << fmt_point(p.location, dim) << "  phi " << fmt("%.6f", p.value) << "\n";

  const auto comps = connected_components(d.grid(), d.mask());
  os << "\nsupport D: " << d.size() << " cells of width " << fmt("%g", d.grid().h) << ", " << comps.size()
     << " component(s)\n";
  for (const auto& comp : comps) {
    Point lo{1e300, 1e300, 1e300}, hi{-1e300, -1e300, -1e300};
    for (std::size_t c : comp) {
      const Point x = d.grid().center(c);
      for (int a = 0; a < dim; ++a) {
        lo[a] = std::min(lo[a], x[a] - 0.5 * d.grid().h);
        hi[a] = std::max(hi[a], x[a] + 0.5 * d.grid().h);
      }
    }
    os << "  " << comp.size() << " cells, box " << fmt_point(lo, dim) << " - " << fmt_point(hi, dim) << "\n";
  }

  os << "\nregularization\n";
  os << "  start   alpha " << fmt("%.4e", inv.start.alpha) << "  beta " << fmt("%.4e", inv.start.beta) << "\n";
  os << "  chosen  alpha " << fmt("%.4e", inv.chosen.alpha) << "  beta " << fmt("%.4e", inv.chosen.beta) << "\n";
  os << "  pairs tried " << inv.search.size() << ", targets " << (inv.accepted ? "met" : "not met") << "\n";

  const SsnResult& res = inv.result;
  std::size_t active = 0;
  for (auto v : res.state.active) active += v;
  os << "\nnewton\n";
  os << "  iterations " << res.iterations << (res.converged ? " (converged)" : " (not converged)") << "\n";
  os << "  active " << active << " / " << res.state.active.size() << "\n";
  os << "  complementarity " << fmt("%.3e", res.state.complementarity) << "\n";
  os << "  stationarity " << fmt("%.3e", res.stationarity) << "\n";

  const Metrics& m = inv.metrics;
  os << "\nmetrics\n";
  os << "  jaccard " << fmt("%.4f", m.jaccard) << "\n";
  os << "  max_error " << fmt("%.4f", m.max_error) << "\n";
  os << "  l2_error " << fmt("%.4f", m.l2_error) << "\n";
  os << "  purity " << fmt("%.4f", m.purity) << "\n";
  os << "  components " << m.components << "\n";
  return os.str();
}

void write_report(const std::filesystem::path& dir, const ReconReport& r) {
  std::filesystem::create_directories(dir);
  auto open = [&](const char* name) {
    std::ofstream os(dir / name);
    if (!os) throw std::runtime_error("cannot write " + (dir / name).string());
    return os;
  };
  open("report.txt") << format_report(r);
  const Metrics& m = r.inversion.metrics;
  open("metrics.csv") << "metric,value\n"
                      << "jaccard," << io::format_double(m.jaccard) << "\n"
                      << "max_error," << io::format_double(m.max_error) << "\n"
                      << "l2_error," << io::format_double(m.l2_error) << "\n"
                      << "purity," << io::format_double(m.purity) << "\n"
                      << "components," << m.components << "\n"
                      << "alpha," << io::format_double(r.inversion.chosen.alpha) << "\n"
                      << "beta," << io::format_double(r.inversion.chosen.beta) << "\n"
                      << "iterations," << r.inversion.result.iterations << "\n";
  open("timings.txt") << "forward " << fmt("%.3f", r.times.forward) << " s\n"
                      << "sample " << fmt("%.3f", r.times.sample) << " s\n"
                      << "invert " << fmt("%.3f", r.times.invert) << " s\n";
}

}  // namespace imsp
