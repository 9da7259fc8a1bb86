// imsp: command-line driver for the two-stage reconstruction.
//
//   imsp pipeline --scenario ex1a --out run/
//   imsp forward  --scenario ex1a --noise 0.2 --out run/
//   imsp sample   --scenario ex1a --out run/
//   imsp invert   --scenario ex1a --out run/
//   imsp gen-scenario --scenario ring > ring.txt
//
// Exit status: 0 on success, 1 when a stage fails, 2 on bad input.

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "imsp/error.hpp"
#include "imsp/io.hpp"
#include "imsp/pipeline.hpp"
#include "imsp/scenario.hpp"

namespace fs = std::filesystem;

namespace {

struct Options {
  std::string scenario = "ex1a";
  std::optional<double> noise;
  std::optional<long long> seed;
  std::optional<double> mu;
  std::optional<double> alpha;
  std::optional<double> beta;
  std::string out = "out";
  std::string in;
  bool full_res = false;
};

imsp::Scenario effective_scenario(const Options& o) {
  imsp::Scenario s = imsp::resolve_scenario(o.scenario);
  if (o.noise) s.noise = *o.noise;
  if (o.seed) {
    if (*o.seed < 0) throw imsp::ParseError("--seed", 0, "seed", "must be non-negative");
    s.seed = static_cast<std::uint64_t>(*o.seed);
  }
  if (o.mu) s.mu = *o.mu;
  if (o.alpha) s.alpha = *o.alpha;
  if (o.beta) s.beta = *o.beta;
  try {
    imsp::validate(s);
  } catch (const std::exception& e) {
    throw imsp::ParseError("command line", 0, "", e.what());
  }
  return s;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

fs::path input_dir(const Options& o) { return o.in.empty() ? fs::path(o.out) : fs::path(o.in); }

template <class T>
T load_input(const char* stage, T (*loader)(const fs::path&), const fs::path& path) {
  try {
    return loader(path);
  } catch (const imsp::ParseError&) {
    throw;
  } catch (const std::exception& e) {
    throw imsp::StageError(stage, e.what());
  }
}

void save_scenario(const fs::path& dir, const imsp::Scenario& s) {
  fs::create_directories(dir);
  std::ofstream os(dir / "scenario.txt");
  imsp::write_scenario(os, s);
}

void print_summary(const imsp::ReconReport& r, const fs::path& dir) {
  std::cout << imsp::format_report(r) << "\nartifacts written to " << dir.string() << "\n";
}

int cmd_forward(const Options& o) {
  const imsp::Scenario s = effective_scenario(o);
  const auto fwd = imsp::run_forward(s);
  imsp::write_forward(o.out, fwd);
  save_scenario(o.out, s);
  std::cout << "forward: " << fwd.measurements.waves() << " wave(s), " << fwd.measurements.receivers.points.size()
            << " receivers, noise " << s.noise << "\n";
  return 0;
}

int cmd_sample(const Options& o) {
  const imsp::Scenario s = effective_scenario(o);
  const auto meas = load_input("sample", imsp::io::load_measurements, input_dir(o) / "measurements.csv");
  const auto smp = imsp::run_sample(s, meas, o.full_res);
  imsp::write_sample(o.out, smp);
  const auto peaks = imsp::index_peaks(s, smp.phi);
  std::cout << "sample: " << peaks.size() << " peak(s), |D| = " << smp.subdomain.size() << "\n";
  return 0;
}

int cmd_invert(const Options& o) {
  const imsp::Scenario s = effective_scenario(o);
  const fs::path in = input_dir(o);
  const auto meas = load_input("invert", imsp::io::load_measurements, in / "measurements.csv");
  const auto mask = load_input("invert", imsp::io::load_mask, in / "mask.csv");
  const auto init = load_input("invert", imsp::io::load_real_field, in / "init.csv");
  imsp::IndexField phi;
  phi.phi = load_input("invert", imsp::io::load_real_field, in / "phi.csv");

  imsp::ReconReport report;
  report.scenario = s.name;
  report.peaks = imsp::index_peaks(s, phi);
  report.subdomain = mask;
  const auto t0 = std::chrono::steady_clock::now();
  report.inversion = imsp::run_invert(s, meas, mask, init);
  report.times.invert = seconds_since(t0);
  imsp::write_invert(o.out, report.inversion);
  imsp::write_report(o.out, report);
  print_summary(report, o.out);
  return 0;
}

int cmd_pipeline(const Options& o) {
  const imsp::Scenario s = effective_scenario(o);
  imsp::ReconReport report;
  report.scenario = s.name;
  auto t0 = std::chrono::steady_clock::now();
  const auto fwd = imsp::run_forward(s);
  report.times.forward = seconds_since(t0);
  t0 = std::chrono::steady_clock::now();
  const auto smp = imsp::run_sample(s, fwd.measurements, o.full_res);
  report.times.sample = seconds_since(t0);
  report.peaks = imsp::index_peaks(s, smp.phi);
  report.subdomain = smp.subdomain;
  t0 = std::chrono::steady_clock::now();
  report.inversion = imsp::run_invert(s, fwd.measurements, smp.subdomain, smp.init);
  report.times.invert = seconds_since(t0);
  save_scenario(o.out, s);
  imsp::write_forward(o.out, fwd);
  imsp::write_sample(o.out, smp);
  imsp::write_invert(o.out, report.inversion);
  imsp::write_report(o.out, report);
  print_summary(report, o.out);
  return 0;
}

int cmd_gen(const Options& o, const std::string& file) {
  const imsp::Scenario s = effective_scenario(o);
  if (file.empty()) {
    imsp::write_scenario(std::cout, s);
  } else {
    std::ofstream os(file);
    if (!os) throw imsp::StageError("gen-scenario", "cannot write " + file);
    imsp::write_scenario(os, s);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Inverse medium scattering: direct sampling followed by L1+H1 enhancement"};
  app.require_subcommand(1);
  Options o;
  std::string gen_file;

  auto common = [&](CLI::App* sub) {
    sub->add_option("--scenario", o.scenario, "built-in name (ex1a, ex1b, ring, cubes3d) or scenario file")
        ->capture_default_str();
    sub->add_option("--noise", o.noise, "relative noise level eps");
    sub->add_option("--seed", o.seed, "noise seed");
    sub->add_option("--mu", o.mu, "support cut-off in (0, 1]");
    sub->add_option("--alpha", o.alpha, "L1 weight (overrides the table value)");
    sub->add_option("--beta", o.beta, "H1 weight (overrides the table value)");
    sub->add_flag("--full-res", o.full_res, "use the full-resolution sampling grid");
  };

  auto* fwd = app.add_subcommand("forward", "simulate measurements");
  auto* smp = app.add_subcommand("sample", "index and support from measurements.csv");
  auto* inv = app.add_subcommand("invert", "enhance on D from measurements.csv, mask.csv, init.csv");
  auto* pipe = app.add_subcommand("pipeline", "all stages in one run");
  auto* gen = app.add_subcommand("gen-scenario", "print a scenario file");
  for (auto* sub : {fwd, smp, inv, pipe}) {
    common(sub);
    sub->add_option("--out", o.out, "output directory")->capture_default_str();
  }
  for (auto* sub : {smp, inv}) sub->add_option("--in", o.in, "input directory (defaults to --out)");
  common(gen);
  gen->add_option("--out", gen_file, "output file (stdout when omitted)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (fwd->parsed()) return cmd_forward(o);
    if (smp->parsed()) return cmd_sample(o);
    if (inv->parsed()) return cmd_invert(o);
    if (pipe->parsed()) return cmd_pipeline(o);
    if (gen->parsed()) return cmd_gen(o, gen_file);
  } catch (const imsp::ParseError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return 2;
  } catch (const imsp::StageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
