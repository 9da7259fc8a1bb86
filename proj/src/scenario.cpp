#include "imsp/scenario.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

#include "imsp/error.hpp"
#include "imsp/io.hpp"

namespace imsp {

std::vector<IncidentWave> Scenario::waves() const {
  std::vector<IncidentWave> out;
  out.reserve(directions.size());
  for (const Point& d : directions) out.emplace_back(k, d);
  return out;
}

RegPair Scenario::start_pair() const {
  const RegPair& table = noise > 0.0 ? table_noisy : table_exact;
  return {alpha.value_or(table.alpha), beta.value_or(table.beta)};
}

namespace {

bool box_inside(const Point& lo, const Point& hi, const Point& olo, const Point& ohi, int dim) {
  const double tol = 1e-9;
  for (int a = 0; a < dim; ++a) {
    if (lo[a] < olo[a] - tol || hi[a] > ohi[a] + tol) return false;
  }
  return true;
}

void primitive_extent(const Primitive& p, int dim, Point& lo, Point& hi) {
  lo = hi = Point{0.0, 0.0, 0.0};
  std::visit(
      [&](const auto& prim) {
        using T = std::decay_t<decltype(prim)>;
        for (int a = 0; a < dim; ++a) {
          double half = 0.0;
          if constexpr (std::is_same_v<T, BoxPrimitive>) {
            half = 0.5 * prim.widths[a];
          } else {
            half = 0.5 * prim.outer_width;
          }
          lo[a] = prim.center[a] - half;
          hi[a] = prim.center[a] + half;
        }
      },
      p);
}

}  // namespace

void validate(const Scenario& s) {
  if (s.dim != 2 && s.dim != 3) throw std::invalid_argument("scenario: dim must be 2 or 3");
  if (!(s.k > 0.0)) throw std::invalid_argument("scenario: k must be positive");
  if (s.directions.empty()) throw std::invalid_argument("scenario: at least one incident direction is required");
  for (const Point& d : s.directions) IncidentWave(s.k, d);
  validate(s.scatterers, s.dim);
  if (!(s.forward.h > 0.0) || !(s.sampling.h > 0.0)) throw std::invalid_argument("scenario: mesh widths must be positive");
  s.forward.grid(s.dim);
  s.sampling.grid(s.dim);
  if (!(s.noise >= 0.0)) throw std::invalid_argument("scenario: noise must be non-negative");
  if (!(s.mu > 0.0 && s.mu <= 1.0)) throw std::invalid_argument("scenario: mu must lie in (0, 1]");
  if (!(s.box_width >= 0.0)) throw std::invalid_argument("scenario: box width must be non-negative");
  if (!(s.box_max_width == 0.0 || s.box_max_width >= s.box_width)) {
    throw std::invalid_argument("scenario: box_max_width must be 0 or at least box_width");
  }
  if (!(s.c > 0.0) || s.max_iters < 1) throw std::invalid_argument("scenario: c and max_iters must be positive");
  if (s.alpha && *s.alpha < 0.0) throw std::invalid_argument("scenario: alpha must be non-negative");
  if (s.beta && *s.beta < 0.0) throw std::invalid_argument("scenario: beta must be non-negative");

  for (const Primitive& p : s.scatterers.primitives) {
    Point lo, hi;
    primitive_extent(p, s.dim, lo, hi);
    if (!box_inside(lo, hi, s.sampling.lo, s.sampling.hi, s.dim)) {
      throw GeometryError("scenario: a scatterer leaves the sampling domain");
    }
    if (!box_inside(lo, hi, s.forward.lo, s.forward.hi, s.dim)) {
      throw GeometryError("scenario: a scatterer leaves the forward domain");
    }
  }

  // Every corner of the sampling box must sit strictly inside the receiver
  // surface.
  const int corners = 1 << s.dim;
  for (int m = 0; m < corners; ++m) {
    Point x{0.0, 0.0, 0.0};
    for (int a = 0; a < s.dim; ++a) x[a] = (m >> a) & 1 ? s.sampling.hi[a] : s.sampling.lo[a];
    const bool inside = std::visit(
        [&](const auto& g) {
          using T = std::decay_t<decltype(g)>;
          if constexpr (std::is_same_v<T, CircleGeometry>) {
            if (s.dim != 2) throw GeometryError("scenario: circle receivers need dim 2");
            return std::hypot(x[0] - g.center[0], x[1] - g.center[1]) < g.radius;
          } else {
            if (s.dim != 3) throw GeometryError("scenario: cube receivers need dim 3");
            for (int a = 0; a < 3; ++a) {
              if (std::abs(x[a] - g.center[a]) >= 0.5 * g.width) return false;
            }
            return true;
          }
        },
        s.receivers);
    if (!inside) throw GeometryError("scenario: receivers do not enclose the sampling domain");
  }
}

// --- parsing ---------------------------------------------------------------

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

struct Entry {
  std::string value;
  int line = 0;
  bool used = false;
};

class Reader {
 public:
  Reader(std::istream& is, std::string source) : source_(std::move(source)) {
    std::string raw;
    int line = 0;
    while (std::getline(is, raw)) {
      ++line;
      const auto hash = raw.find('#');
      const std::string text = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
      if (text.empty()) continue;
      const auto eq = text.find('=');
      if (eq == std::string::npos) throw ParseError(source_, line, "", "expected 'key = value'");
      const std::string key = trim(text.substr(0, eq));
      const std::string value = trim(text.substr(eq + 1));
      if (key.empty()) throw ParseError(source_, line, "", "empty key");
      if (value.empty()) throw ParseError(source_, line, key, "empty value");
      if (entries_.count(key)) throw ParseError(source_, line, key, "duplicate key");
      entries_[key] = Entry{value, line, false};
      last_line_ = line;
    }
  }

  bool has(const std::string& key) const { return entries_.count(key) != 0; }

  const Entry& entry(const std::string& key) {
    auto it = entries_.find(key);
    if (it == entries_.end()) throw ParseError(source_, last_line_, key, "missing required key");
    it->second.used = true;
    return it->second;
  }

  std::string str(const std::string& key) { return entry(key).value; }

  double num(const std::string& key) {
    const Entry& e = entry(key);
    return parse_double(e.value, e.line, key);
  }

  double num_or(const std::string& key, double fallback) { return has(key) ? num(key) : fallback; }

  long long integer(const std::string& key) {
    const Entry& e = entry(key);
    long long v = 0;
    const char* end = e.value.data() + e.value.size();
    auto [p, ec] = std::from_chars(e.value.data(), end, v);
    if (ec != std::errc() || p != end) throw ParseError(source_, e.line, key, "expected an integer, got '" + e.value + "'");
    return v;
  }

  std::vector<double> list(const std::string& key, std::size_t expected) {
    const Entry& e = entry(key);
    std::vector<double> out;
    std::stringstream ss(e.value);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(parse_double(trim(item), e.line, key));
    if (expected != 0 && out.size() != expected) {
      throw ParseError(source_, e.line, key,
                       "expected " + std::to_string(expected) + " components, got " + std::to_string(out.size()));
    }
    return out;
  }

  Point point(const std::string& key, int dim) {
    const auto v = list(key, static_cast<std::size_t>(dim));
    Point p{0.0, 0.0, 0.0};
    std::copy(v.begin(), v.end(), p.begin());
    return p;
  }

  [[noreturn]] void fail(const std::string& key, const std::string& message) {
    auto it = entries_.find(key);
    throw ParseError(source_, it == entries_.end() ? last_line_ : it->second.line, key, message);
  }

  void reject_unused() const {
    for (const auto& [key, e] : entries_) {
      if (!e.used) throw ParseError(source_, e.line, key, "unknown key");
    }
  }

  const std::string& source() const { return source_; }
  int last_line() const { return last_line_; }

 private:
  double parse_double(const std::string& text, int line, const std::string& key) const {
    double v = 0.0;
    const char* end = text.data() + text.size();
    auto [p, ec] = std::from_chars(text.data(), end, v);
    if (ec != std::errc() || p != end || !std::isfinite(v)) {
      throw ParseError(source_, line, key, "expected a number, got '" + text + "'");
    }
    return v;
  }

  std::string source_;
  std::map<std::string, Entry> entries_;
  int last_line_ = 0;
};

int positive_count(Reader& r, const std::string& key) {
  const long long n = r.integer(key);
  if (n < 1 || n > 1'000'000) r.fail(key, "must be a positive count");
  return static_cast<int>(n);
}

MeshSpec read_mesh(Reader& r, const std::string& section, int dim) {
  MeshSpec m;
  m.lo = r.point(section + ".lo", dim);
  m.hi = r.point(section + ".hi", dim);
  m.h = r.num(section + ".h");
  return m;
}

}  // namespace

Scenario parse_scenario(std::istream& is, const std::string& source) {
  Reader r(is, source);
  Scenario s;
  s.name = r.str("name");
  const long long dim = r.integer("dim");
  if (dim != 2 && dim != 3) r.fail("dim", "must be 2 or 3");
  s.dim = static_cast<int>(dim);
  s.k = r.num("k");

  const int nwaves = positive_count(r, "waves.count");
  for (int i = 0; i < nwaves; ++i) s.directions.push_back(r.point("waves." + std::to_string(i) + ".direction", s.dim));

  const long long nprim = r.integer("scatterer.count");
  if (nprim < 0) r.fail("scatterer.count", "must be non-negative");
  for (long long i = 0; i < nprim; ++i) {
    const std::string p = "scatterer." + std::to_string(i) + ".";
    const std::string type = r.str(p + "type");
    if (type == "box") {
      BoxPrimitive b;
      b.center = r.point(p + "center", s.dim);
      b.widths = r.point(p + "widths", s.dim);
      b.value = r.num(p + "value");
      s.scatterers.primitives.push_back(b);
    } else if (type == "ring") {
      RingBoxPrimitive b;
      b.center = r.point(p + "center", s.dim);
      b.outer_width = r.num(p + "outer");
      b.inner_width = r.num(p + "inner");
      b.value = r.num(p + "value");
      s.scatterers.primitives.push_back(b);
    } else {
      r.fail(p + "type", "expected 'box' or 'ring', got '" + type + "'");
    }
  }

  s.forward = read_mesh(r, "forward", s.dim);
  s.sampling = read_mesh(r, "sampling", s.dim);
  s.full_res_h = r.num_or("sampling.full_res_h", s.sampling.h);

  const std::string rtype = r.str("receivers.type");
  if (rtype == "circle") {
    CircleGeometry g;
    g.center = r.point("receivers.center", s.dim);
    g.radius = r.num("receivers.radius");
    g.count = positive_count(r, "receivers.count");
    s.receivers = g;
  } else if (rtype == "cube") {
    CubeSurfaceGeometry g;
    g.center = r.point("receivers.center", s.dim);
    g.width = r.num("receivers.width");
    g.per_axis = positive_count(r, "receivers.per_axis");
    s.receivers = g;
  } else {
    r.fail("receivers.type", "expected 'circle' or 'cube', got '" + rtype + "'");
  }

  s.noise = r.num_or("noise.eps", 0.0);
  if (r.has("noise.seed")) {
    const long long seed = r.integer("noise.seed");
    if (seed < 0) r.fail("noise.seed", "must be non-negative");
    s.seed = static_cast<std::uint64_t>(seed);
  }

  s.mu = r.num_or("support.mu", s.mu);
  if (r.has("support.mode")) {
    const std::string mode = r.str("support.mode");
    if (mode == "box") {
      s.support_mode = SupportMode::Box;
    } else if (mode == "threshold") {
      s.support_mode = SupportMode::Threshold;
    } else {
      r.fail("support.mode", "expected 'box' or 'threshold', got '" + mode + "'");
    }
  }
  s.box_width = r.num_or("support.box_width", s.box_width);
  s.box_max_width = r.num_or("support.box_max_width", s.box_max_width);

  s.inversion_h = r.num_or("inversion.h", 0.0);
  for (const char* name : {"alpha", "beta"}) {
    const std::string key = std::string("inversion.") + name;
    if (!r.has(key) || r.str(key) == "auto") continue;
    (name[0] == 'a' ? s.alpha : s.beta) = r.num(key);
  }
  s.c = r.num_or("inversion.c", s.c);
  if (r.has("inversion.max_iters")) {
    s.max_iters = positive_count(r, "inversion.max_iters");
  }

  if (r.has("table.exact")) {
    const auto v = r.list("table.exact", 2);
    s.table_exact = {v[0], v[1]};
  }
  if (r.has("table.noisy")) {
    const auto v = r.list("table.noisy", 2);
    s.table_noisy = {v[0], v[1]};
  }

  if (r.has("search.enabled")) {
    const std::string v = r.str("search.enabled");
    if (v != "true" && v != "false") r.fail("search.enabled", "expected 'true' or 'false'");
    s.search.enabled = v == "true";
  }
  s.search.jaccard_exact = r.num_or("search.jaccard_exact", s.search.jaccard_exact);
  s.search.jaccard_noisy = r.num_or("search.jaccard_noisy", s.search.jaccard_noisy);
  s.search.max_error = r.num_or("search.max_error", s.search.max_error);
  s.search.purity = r.num_or("search.purity", s.search.purity);

  r.reject_unused();
  try {
    validate(s);
  } catch (const std::exception& e) {
    throw ParseError(source, r.last_line(), "", e.what());
  }
  return s;
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path.string(), 0, "", "cannot open scenario file");
  return parse_scenario(in, path.string());
}

namespace {

std::string join(const Point& p, int dim) {
  std::string out;
  for (int a = 0; a < dim; ++a) {
    if (a) out += ",";
    out += io::format_double(p[a]);
  }
  return out;
}

}  // namespace

void write_scenario(std::ostream& os, const Scenario& s) {
  using io::format_double;
  const int d = s.dim;
  os << "name = " << s.name << "\n";
  os << "dim = " << d << "\n";
  os << "k = " << format_double(s.k) << "\n\n";

  os << "waves.count = " << s.directions.size() << "\n";
  for (std::size_t i = 0; i < s.directions.size(); ++i) {
    os << "waves." << i << ".direction = " << join(s.directions[i], d) << "\n";
  }
  os << "\nscatterer.count = " << s.scatterers.primitives.size() << "\n";
  for (std::size_t i = 0; i < s.scatterers.primitives.size(); ++i) {
    const std::string p = "scatterer." + std::to_string(i) + ".";
    std::visit(
        [&](const auto& prim) {
          using T = std::decay_t<decltype(prim)>;
          if constexpr (std::is_same_v<T, BoxPrimitive>) {
            os << p << "type = box\n";
            os << p << "center = " << join(prim.center, d) << "\n";
            os << p << "widths = " << join(prim.widths, d) << "\n";
          } else {
            os << p << "type = ring\n";
            os << p << "center = " << join(prim.center, d) << "\n";
            os << p << "outer = " << format_double(prim.outer_width) << "\n";
            os << p << "inner = " << format_double(prim.inner_width) << "\n";
          }
          os << p << "value = " << format_double(prim.value) << "\n";
        },
        s.scatterers.primitives[i]);
  }

  for (const auto& [name, mesh] : {std::pair{"forward", &s.forward}, std::pair{"sampling", &s.sampling}}) {
    os << "\n" << name << ".lo = " << join(mesh->lo, d) << "\n";
    os << name << ".hi = " << join(mesh->hi, d) << "\n";
    os << name << ".h = " << format_double(mesh->h) << "\n";
  }
  os << "sampling.full_res_h = " << format_double(s.full_res_h) << "\n\n";

  std::visit(
      [&](const auto& g) {
        using T = std::decay_t<decltype(g)>;
        if constexpr (std::is_same_v<T, CircleGeometry>) {
          os << "receivers.type = circle\n";
          os << "receivers.center = " << join(g.center, d) << "\n";
          os << "receivers.radius = " << format_double(g.radius) << "\n";
          os << "receivers.count = " << g.count << "\n";
        } else {
          os << "receivers.type = cube\n";
          os << "receivers.center = " << join(g.center, d) << "\n";
          os << "receivers.width = " << format_double(g.width) << "\n";
          os << "receivers.per_axis = " << g.per_axis << "\n";
        }
      },
      s.receivers);

  os << "\nnoise.eps = " << format_double(s.noise) << "\n";
  os << "noise.seed = " << s.seed << "\n\n";

  os << "support.mu = " << format_double(s.mu) << "\n";
  os << "support.mode = " << (s.support_mode == SupportMode::Box ? "box" : "threshold") << "\n";
  os << "support.box_width = " << format_double(s.box_width) << "\n";
  os << "support.box_max_width = " << format_double(s.box_max_width) << "\n\n";

  os << "inversion.h = " << format_double(s.inversion_h) << "\n";
  os << "inversion.alpha = " << (s.alpha ? format_double(*s.alpha) : "auto") << "\n";
  os << "inversion.beta = " << (s.beta ? format_double(*s.beta) : "auto") << "\n";
  os << "inversion.c = " << format_double(s.c) << "\n";
  os << "inversion.max_iters = " << s.max_iters << "\n\n";

  os << "table.exact = " << format_double(s.table_exact.alpha) << "," << format_double(s.table_exact.beta) << "\n";
  os << "table.noisy = " << format_double(s.table_noisy.alpha) << "," << format_double(s.table_noisy.beta) << "\n\n";

  os << "search.enabled = " << (s.search.enabled ? "true" : "false") << "\n";
  os << "search.jaccard_exact = " << format_double(s.search.jaccard_exact) << "\n";
  os << "search.jaccard_noisy = " << format_double(s.search.jaccard_noisy) << "\n";
  os << "search.max_error = " << format_double(s.search.max_error) << "\n";
  os << "search.purity = " << format_double(s.search.purity) << "\n";
}

// --- built-ins -------------------------------------------------------------

namespace {

Scenario planar_defaults(std::string name) {
  Scenario s;
  s.name = std::move(name);
  s.dim = 2;
  s.k = 2.0 * M_PI;
  s.directions = {{M_SQRT1_2, M_SQRT1_2, 0.0}};
  s.forward = {{-2.0, -2.0, 0.0}, {2.0, 2.0, 0.0}, 0.01};
  s.sampling = {{-2.0, -2.0, 0.0}, {2.0, 2.0, 0.0}, 0.02};
  s.full_res_h = 0.01;
  s.receivers = CircleGeometry{{0.0, 0.0, 0.0}, 5.0, 30};
  s.mu = 0.6;
  s.box_width = 0.4;
  return s;
}

}  // namespace

std::vector<std::string> builtin_scenario_names() { return {"ex1a", "ex1b", "ring", "cubes3d"}; }

std::optional<Scenario> builtin_scenario(const std::string& name) {
  if (name == "ex1a") {
    Scenario s = planar_defaults(name);
    s.scatterers.primitives = {BoxPrimitive{{-0.8, -0.7, 0.0}, {0.2, 0.2, 0.0}, 1.0},
                               BoxPrimitive{{0.3, 0.9, 0.0}, {0.2, 0.2, 0.0}, 1.0}};
    s.table_exact = {2.0e-6, 1.5e-9};
    s.table_noisy = {3.0e-6, 2.0e-9};
    return s;
  }
  if (name == "ex1b") {
    Scenario s = planar_defaults(name);
    s.scatterers.primitives = {BoxPrimitive{{-0.25, 0.0, 0.0}, {0.3, 0.3, 0.0}, 1.5},
                               BoxPrimitive{{0.25, 0.0, 0.0}, {0.3, 0.3, 0.0}, 1.0}};
    // One square of width 1 around both modes.
    s.box_width = 1.0;
    s.table_exact = {8.0e-6, 1.4e-8};
    s.table_noisy = {8.5e-6, 9.0e-9};
    return s;
  }
  if (name == "ring") {
    Scenario s = planar_defaults(name);
    s.directions = {{M_SQRT1_2, M_SQRT1_2, 0.0}, {M_SQRT1_2, -M_SQRT1_2, 0.0}};
    s.scatterers.primitives = {RingBoxPrimitive{{0.0, 0.0, 0.0}, 0.6, 0.4, 1.0}};
    s.table_exact = {7.0e-6, 1.0e-9};
    s.table_noisy = {7.0e-6, 5.0e-9};
    return s;
  }
  if (name == "cubes3d") {
    Scenario s;
    s.name = name;
    s.dim = 3;
    s.k = 2.0 * M_PI;
    const double r3 = 1.0 / std::sqrt(3.0);
    s.directions = {{r3, r3, r3}};
    s.scatterers.primitives = {BoxPrimitive{{0.35, 0.15, 0.15}, {0.1, 0.1, 0.1}, 1.0},
                               BoxPrimitive{{-0.35, 0.15, 0.15}, {0.1, 0.1, 0.1}, 1.0}};
    s.forward = {{-1.0, -1.0, -1.0}, {1.0, 1.0, 1.0}, 0.0125};
    s.sampling = {{-1.0, -1.0, -1.0}, {1.0, 1.0, 1.0}, 0.04};
    s.full_res_h = 0.02;
    s.receivers = CubeSurfaceGeometry{{0.0, 0.0, 0.0}, 5.0, 10};
    s.mu = 0.6;
    s.box_width = 0.36;
    s.box_max_width = 0.36;
    s.table_exact = {2.5e-9, 4.0e-14};
    s.table_noisy = {2.5e-9, 5.0e-14};
    return s;
  }
  return std::nullopt;
}

Scenario resolve_scenario(const std::string& name_or_path) {
  if (auto s = builtin_scenario(name_or_path)) return *s;
  return load_scenario(name_or_path);
}

}  // namespace imsp
