#include <sstream>

#include "doctest.h"
#include "imsp/error.hpp"
#include "imsp/scenario.hpp"

using namespace imsp;

namespace {

Scenario round_trip(const Scenario& s) {
  std::stringstream ss;
  write_scenario(ss, s);
  return parse_scenario(ss, "rt");
}

std::string text_of(const Scenario& s) {
  std::stringstream ss;
  write_scenario(ss, s);
  return ss.str();
}

// Replaces the value of `key` in a written scenario.
std::string with(std::string text, const std::string& key, const std::string& value) {
  const auto at = text.find("\n" + key + " = ");
  REQUIRE(at != std::string::npos);
  const auto eol = text.find('\n', at + 1);
  return text.replace(at + 1, eol - at - 1, key + " = " + value);
}

int parse_error_line(const std::string& text) {
  std::stringstream ss(text);
  try {
    parse_scenario(ss, "s.txt");
  } catch (const ParseError& e) {
    return e.line();
  }
  return -1;
}

}  // namespace

TEST_CASE("built-in scenarios round-trip through the text format") {
  for (const std::string& name : builtin_scenario_names()) {
    CAPTURE(name);
    const Scenario s = *builtin_scenario(name);
    CHECK_NOTHROW(validate(s));
    const Scenario r = round_trip(s);
    CHECK(r == s);
    CHECK(text_of(r) == text_of(s));
  }
  CHECK_FALSE(builtin_scenario("nope").has_value());
}

TEST_CASE("overrides survive a round trip") {
  Scenario s = *builtin_scenario("ex1a");
  s.noise = 0.2;
  s.seed = 7;
  s.alpha = 1.25e-6;
  s.mu = 0.55;
  s.support_mode = SupportMode::Threshold;
  s.inversion_h = 0.01;
  s.search.enabled = false;
  s.scatterers.primitives.push_back(RingBoxPrimitive{{0.5, -0.5, 0}, 0.6, 0.2, 0.7});
  CHECK(round_trip(s) == s);
}

TEST_CASE("start pair follows the table for the noise level") {
  Scenario s = *builtin_scenario("ex1a");
  CHECK(s.start_pair() == RegPair{2.0e-6, 1.5e-9});
  s.noise = 0.2;
  CHECK(s.start_pair() == RegPair{3.0e-6, 2.0e-9});
  s.beta = 4e-9;
  CHECK(s.start_pair() == RegPair{3.0e-6, 4e-9});
  CHECK(builtin_scenario("cubes3d")->start_pair() == RegPair{2.5e-9, 4.0e-14});
}

TEST_CASE("parse errors name the line and key") {
  const std::string base = text_of(*builtin_scenario("ex1a"));

  SUBCASE("unknown key") {
    const std::string t = base + "bogus.key = 3\n";
    std::stringstream ss(t);
    CHECK_THROWS_WITH_AS(parse_scenario(ss), doctest::Contains("'bogus.key': unknown key"), ParseError);
  }
  SUBCASE("bad number") {
    const std::string t = with(base, "k", "six");
    const auto line = 1 + std::count(t.begin(), t.begin() + static_cast<long>(t.find("\nk = ")) + 1, '\n');
    CHECK(parse_error_line(t) == line);
  }
  SUBCASE("missing key") {
    std::string t = base;
    const auto at = t.find("sampling.h = ");
    t.erase(at, t.find('\n', at) - at + 1);
    std::stringstream ss(t);
    CHECK_THROWS_WITH_AS(parse_scenario(ss), doctest::Contains("'sampling.h': missing required key"), ParseError);
  }
  SUBCASE("duplicate key") {
    std::stringstream ss(base + "k = 3\n");
    CHECK_THROWS_WITH_AS(parse_scenario(ss), doctest::Contains("duplicate key"), ParseError);
  }
  SUBCASE("wrong vector length") {
    CHECK(parse_error_line(with(base, "waves.0.direction", "1,0,0")) > 0);
  }
  SUBCASE("no equals sign") {
    std::stringstream ss("name ex1a\n");
    try {
      parse_scenario(ss, "s.txt");
      FAIL("expected a parse error");
    } catch (const ParseError& e) {
      CHECK(e.line() == 1);
    }
  }
  SUBCASE("bad enumerations") {
    CHECK(parse_error_line(with(base, "support.mode", "blob")) > 0);
    CHECK(parse_error_line(with(base, "receivers.type", "sphere")) > 0);
    CHECK(parse_error_line(with(base, "scatterer.0.type", "disc")) > 0);
  }
  SUBCASE("semantic failures become parse errors") {
    CHECK(parse_error_line(with(base, "support.mu", "1.5")) > 0);
    CHECK(parse_error_line(with(base, "receivers.radius", "2.5")) > 0);
  }
  SUBCASE("comments and blank lines are ignored") {
    std::stringstream ss("# header\n\n" + with(base, "k", "6.283185307179586  # wavenumber"));
    CHECK(parse_scenario(ss).k == 6.283185307179586);
  }
}

TEST_CASE("validation") {
  SUBCASE("receivers must enclose the sampling box") {
    Scenario s = *builtin_scenario("ex1a");
    s.receivers = CircleGeometry{{0, 0, 0}, 2.5, 30};  // corners at 2 sqrt 2
    CHECK_THROWS_AS(validate(s), GeometryError);
  }
  SUBCASE("scatterer outside the sampling box") {
    Scenario s = *builtin_scenario("ex1a");
    s.scatterers.primitives.push_back(BoxPrimitive{{1.95, 0, 0}, {0.2, 0.2, 0}, 1.0});
    CHECK_THROWS_AS(validate(s), GeometryError);
  }
  SUBCASE("geometry of the wrong dimension") {
    Scenario s = *builtin_scenario("cubes3d");
    s.receivers = CircleGeometry{{0, 0, 0}, 5, 30};
    CHECK_THROWS_AS(validate(s), GeometryError);
  }
  SUBCASE("numeric ranges") {
    Scenario s = *builtin_scenario("ring");
    s.mu = 0.0;
    CHECK_THROWS(validate(s));
    s = *builtin_scenario("ring");
    s.noise = -0.1;
    CHECK_THROWS(validate(s));
    s = *builtin_scenario("ring");
    s.alpha = -1.0;
    CHECK_THROWS(validate(s));
    s = *builtin_scenario("ring");
    s.box_max_width = 0.2;
    CHECK_THROWS(validate(s));
    s = *builtin_scenario("ring");
    s.directions = {{1, 1, 0}};
    CHECK_THROWS(validate(s));
  }
}
