#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "doctest.h"
#include "imsp/error.hpp"
#include "imsp/pipeline.hpp"

using namespace imsp;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("imsp_test_pipeline_" + std::to_string(::getpid())) / name;
  fs::remove_all(p);
  fs::create_directories(p.parent_path());
  return p;
}

int cli(const std::string& args) {
  const std::string cmd = std::string(IMSP_CLI) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::set<std::string> listing(const fs::path& dir) {
  std::set<std::string> out;
  for (const auto& e : fs::directory_iterator(dir)) out.insert(e.path().filename().string());
  return out;
}

// Every artifact except the wall-clock timings must match byte for byte.
void check_same_artifacts(const fs::path& a, const fs::path& b) {
  std::set<std::string> la = listing(a), lb = listing(b);
  la.erase("timings.txt");
  lb.erase("timings.txt");
  CHECK(la == lb);
  for (const std::string& f : la) {
    CAPTURE(f);
    CHECK(slurp(a / f) == slurp(b / f));
  }
}

}  // namespace

TEST_CASE("metrics on a hand-built example") {
  const UniformGrid g(2, {0, 0, 0}, 1.0, {4, 4, 1});
  RealField truth(g, 0.0), rec(g, 0.0);
  // truth: 2 x 2 block of ones at the corner
  for (std::size_t c : {0u, 1u, 4u, 5u}) truth.values[c] = 1.0;
  // reconstruction: three of the four cells, one stray cell, one faint cell
  rec.values[0] = 1.2;
  rec.values[1] = 0.9;
  rec.values[4] = 0.8;
  rec.values[10] = 0.7;
  rec.values[15] = 0.05;
  const SubdomainMask d(g, std::vector<std::uint8_t>(16, 1));
  const Metrics m = compute_metrics(rec, truth, d);
  // support {|eta| >= 0.6}: {0, 1, 4, 10}; truth {0, 1, 4, 5}
  CHECK(m.jaccard == doctest::Approx(3.0 / 5.0));
  CHECK(m.max_error == doctest::Approx(0.2));
  // outside-truth cells of D: 12, of which only cell 10 exceeds 0.1
  CHECK(m.purity == doctest::Approx(1.0 / 12.0));
  CHECK(m.components == 2);
  const double num = 0.2 * 0.2 + 0.1 * 0.1 + 0.2 * 0.2 + 1.0 + 0.7 * 0.7 + 0.05 * 0.05;
  CHECK(m.l2_error == doctest::Approx(std::sqrt(num / 4.0)));

  // Purity only looks at D; the Jaccard index covers the whole mesh.
  const SubdomainMask half = SubdomainMask::from_cells(g, std::vector<std::size_t>{0, 1, 4, 5, 6, 7});
  const Metrics mh = compute_metrics(rec, truth, half);
  CHECK(mh.purity == 0.0);
  CHECK(mh.jaccard == doctest::Approx(3.0 / 5.0));
}

TEST_CASE("search factors") {
  CHECK(search_factors() == std::vector<double>{0.1, 0.2, 0.5, 1.0, 2.0, 5.0, 10.0});
}

TEST_CASE("stage failures are wrapped with the stage name") {
  const Scenario s = *builtin_scenario("ex1a");
  MeasurementSet zero;
  zero.k = s.k;
  zero.receivers = make_receivers(s.receivers);
  zero.directions = s.directions;
  zero.data.assign(1, std::vector<Complex>(zero.receivers.points.size(), Complex(0, 0)));
  try {
    run_sample(s, zero);
    FAIL("expected a stage error");
  } catch (const StageError& e) {
    CHECK(e.stage() == "sample");
    CHECK(std::string(e.what()).find("empty field") != std::string::npos);
  }

  const UniformGrid g = sampling_grid(s, false);
  const SubdomainMask empty(g, std::vector<std::uint8_t>(g.size(), 0));
  try {
    run_invert(s, zero, empty, RealField(g, 0.0));
    FAIL("expected a stage error");
  } catch (const StageError& e) {
    CHECK(e.stage() == "invert");
  }
}

TEST_CASE("in-process runs are deterministic") {
  Scenario s = *builtin_scenario("ex1a");
  s.noise = 0.2;
  s.search.enabled = false;
  const ReconReport a = run_pipeline(s);
  const ReconReport b = run_pipeline(s);
  CHECK(format_report(a) == format_report(b));
  CHECK(a.inversion.eta_rec.values == b.inversion.eta_rec.values);
  CHECK(a.inversion.search.size() == 1);
  CHECK(a.inversion.start == RegPair{3.0e-6, 2.0e-9});
  CHECK(a.inversion.result.converged);
  CHECK(a.inversion.result.iterations <= 25);
}

TEST_CASE("command line: stage decomposition matches the one-shot pipeline") {
  for (const char* noise : {"0", "0.2"}) {
    CAPTURE(noise);
    const fs::path one = scratch(std::string("one_") + noise), staged = scratch(std::string("staged_") + noise);
    const std::string common = std::string(" --scenario ex1a --noise ") + noise + " --seed 42 --out ";
    REQUIRE(cli("pipeline" + common + one.string()) == 0);
    REQUIRE(cli("forward" + common + staged.string()) == 0);
    REQUIRE(cli("sample" + common + staged.string()) == 0);
    REQUIRE(cli("invert" + common + staged.string()) == 0);
    check_same_artifacts(one, staged);

    const fs::path again = scratch(std::string("again_") + noise);
    REQUIRE(cli("pipeline" + common + again.string()) == 0);
    check_same_artifacts(one, again);

    const std::string report = slurp(one / "report.txt");
    CHECK(report.find(std::string(noise) == "0" ? "start   alpha 2.0000e-06  beta 1.5000e-09"
                                                : "start   alpha 3.0000e-06  beta 2.0000e-09") != std::string::npos);
  }
}

TEST_CASE("command line: generated scenario files parse back to the built-in") {
  for (const std::string& name : builtin_scenario_names()) {
    const fs::path f = scratch(name + ".txt");
    REQUIRE(cli("gen-scenario --scenario " + name + " --out " + f.string()) == 0);
    CHECK(load_scenario(f) == *builtin_scenario(name));
  }
}

TEST_CASE("command line: exit codes") {
  const fs::path bad = scratch("bad.txt");
  std::ofstream(bad) << "name = x\ndim = 7\n";
  CHECK(cli("forward --scenario " + bad.string() + " --out " + scratch("o1").string()) == 2);
  CHECK(cli("forward --scenario ex1a --noise -1 --out " + scratch("o2").string()) == 2);
  CHECK(cli("forward --bogus-flag") == 2);
  CHECK(cli("sample --scenario ex1a --in " + scratch("missing").string() + " --out " + scratch("o3").string()) == 1);
}
