#include "imsp/io.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "imsp/error.hpp"

namespace imsp::io {

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace {

// Line-oriented CSV reader that remembers its position for error messages.
class CsvReader {
 public:
  CsvReader(std::istream& is, std::string source) : is_(is), source_(std::move(source)) {}

  bool next(std::vector<std::string>& fields) {
    std::string line;
    while (std::getline(is_, line)) {
      ++line_;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.empty()) continue;
      fields.clear();
      std::stringstream ss(line);
      std::string f;
      while (std::getline(ss, f, ',')) fields.push_back(f);
      if (line.back() == ',') fields.emplace_back();
      return true;
    }
    return false;
  }

  std::vector<std::string> expect(const std::string& key, std::size_t min_fields) {
    std::vector<std::string> fields;
    if (!next(fields)) fail(key, "unexpected end of file");
    if (fields.front() != key) fail(key, "expected header '" + key + "', found '" + fields.front() + "'");
    if (fields.size() < min_fields) fail(key, "too few fields");
    return fields;
  }

  double to_double(const std::string& s, const std::string& field) const {
    double v = 0.0;
    const auto* end = s.data() + s.size();
    const auto res = std::from_chars(s.data(), end, v);
    if (res.ec != std::errc() || res.ptr != end) fail(field, "not a number: '" + s + "'");
    return v;
  }

  long long to_int(const std::string& s, const std::string& field) const {
    long long v = 0;
    const auto* end = s.data() + s.size();
    const auto res = std::from_chars(s.data(), end, v);
    if (res.ec != std::errc() || res.ptr != end) fail(field, "not an integer: '" + s + "'");
    return v;
  }

  [[noreturn]] void fail(const std::string& field, const std::string& msg) const {
    throw ParseError(source_, line_, field, msg);
  }

 private:
  std::istream& is_;
  std::string source_;
  int line_ = 0;
};

void write_grid_header(std::ostream& os, const UniformGrid& g) {
  os << "dim," << g.dim << '\n' << "origin_h";
  for (int a = 0; a < g.dim; ++a) os << ',' << format_double(g.origin[a]);
  os << ',' << format_double(g.h) << '\n' << "counts";
  for (int a = 0; a < g.dim; ++a) os << ',' << g.counts[a];
  os << '\n';
}

void write_index(std::ostream& os, const UniformGrid& g, std::size_t c) {
  const auto idx = g.multi_index(c);
  os << idx[0] << ',' << idx[1];
  if (g.dim == 3) os << ',' << idx[2];
}

UniformGrid read_grid_header(CsvReader& r) {
  const auto dim_f = r.expect("dim", 2);
  const int dim = static_cast<int>(r.to_int(dim_f[1], "dim"));
  if (dim != 2 && dim != 3) r.fail("dim", "must be 2 or 3");
  const auto oh = r.expect("origin_h", static_cast<std::size_t>(dim) + 2);
  Point origin{0.0, 0.0, 0.0};
  for (int a = 0; a < dim; ++a) origin[a] = r.to_double(oh[a + 1], "origin_h");
  const double h = r.to_double(oh[dim + 1], "origin_h");
  const auto cf = r.expect("counts", static_cast<std::size_t>(dim) + 1);
  std::array<int, 3> counts{1, 1, 1};
  for (int a = 0; a < dim; ++a) counts[a] = static_cast<int>(r.to_int(cf[a + 1], "counts"));
  try {
    return UniformGrid(dim, origin, h, counts);
  } catch (const std::invalid_argument& e) {
    r.fail("counts", e.what());
  }
}

// Reads the per-cell rows; `width` value columns follow the multi-index.
template <class Store>
void read_rows(CsvReader& r, const UniformGrid& g, std::size_t width, Store store) {
  std::vector<std::string> fields;
  std::size_t expected = 0;
  const auto d = static_cast<std::size_t>(g.dim);
  while (r.next(fields)) {
    if (fields.size() != d + width) r.fail("row", "wrong number of columns");
    std::array<int, 3> idx{0, 0, 0};
    for (std::size_t a = 0; a < d; ++a) idx[a] = static_cast<int>(r.to_int(fields[a], "index"));
    for (std::size_t a = 0; a < d; ++a) {
      if (idx[a] < 0 || idx[a] >= g.counts[a]) r.fail("index", "cell index out of range");
    }
    const std::size_t c = g.linear_index(idx);
    if (c != expected) r.fail("index", "rows must be in row-major order");
    store(c, std::span<const std::string>(fields).subspan(d));
    ++expected;
  }
  if (expected != g.size()) r.fail("row", "expected " + std::to_string(g.size()) + " rows");
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write " + path.string());
  return os;
}

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot read " + path.string());
  return is;
}

}  // namespace

void write_field(std::ostream& os, const RealField& field) {
  write_grid_header(os, field.grid);
  for (std::size_t c = 0; c < field.values.size(); ++c) {
    write_index(os, field.grid, c);
    os << ',' << format_double(field.values[c]) << '\n';
  }
}

void write_field(std::ostream& os, const ComplexField& field) {
  write_grid_header(os, field.grid);
  for (std::size_t c = 0; c < field.values.size(); ++c) {
    write_index(os, field.grid, c);
    os << ',' << format_double(field.values[c].real()) << ',' << format_double(field.values[c].imag()) << '\n';
  }
}

void write_mask(std::ostream& os, const SubdomainMask& mask) {
  write_grid_header(os, mask.grid());
  for (std::size_t c = 0; c < mask.mask().size(); ++c) {
    write_index(os, mask.grid(), c);
    os << ',' << (mask.contains(c) ? 1 : 0) << '\n';
  }
}

RealField read_real_field(std::istream& is, const std::string& source) {
  CsvReader r(is, source);
  const UniformGrid g = read_grid_header(r);
  RealField out(g, 0.0);
  read_rows(r, g, 1, [&](std::size_t c, std::span<const std::string> v) { out.values[c] = r.to_double(v[0], "value"); });
  return out;
}

ComplexField read_complex_field(std::istream& is, const std::string& source) {
  CsvReader r(is, source);
  const UniformGrid g = read_grid_header(r);
  ComplexField out(g);
  read_rows(r, g, 2, [&](std::size_t c, std::span<const std::string> v) {
    out.values[c] = {r.to_double(v[0], "re"), r.to_double(v[1], "im")};
  });
  return out;
}

SubdomainMask read_mask(std::istream& is, const std::string& source) {
  CsvReader r(is, source);
  const UniformGrid g = read_grid_header(r);
  std::vector<std::uint8_t> mask(g.size(), 0);
  read_rows(r, g, 1, [&](std::size_t c, std::span<const std::string> v) {
    const auto bit = r.to_int(v[0], "mask");
    if (bit != 0 && bit != 1) r.fail("mask", "mask values must be 0 or 1");
    mask[c] = static_cast<std::uint8_t>(bit);
  });
  return SubdomainMask(g, std::move(mask));
}

void write_measurements(std::ostream& os, const MeasurementSet& data) {
  const int dim = data.receivers.dim;
  os << "k," << format_double(data.k) << '\n' << "dim," << dim << '\n';
  if (const auto* c = std::get_if<CircleGeometry>(&data.receivers.geometry)) {
    os << "geometry,circle," << format_double(c->center[0]) << ',' << format_double(c->center[1]) << ','
       << format_double(c->center[2]) << ',' << format_double(c->radius) << ',' << c->count << '\n';
  } else {
    const auto& q = std::get<CubeSurfaceGeometry>(data.receivers.geometry);
    os << "geometry,cube," << format_double(q.center[0]) << ',' << format_double(q.center[1]) << ','
       << format_double(q.center[2]) << ',' << format_double(q.width) << ',' << q.per_axis << '\n';
  }
  os << "directions," << data.directions.size() << '\n';
  for (const Point& d : data.directions) {
    os << "direction";
    for (int a = 0; a < dim; ++a) os << ',' << format_double(d[a]);
    os << '\n';
  }
  os << "noise," << format_double(data.noise) << '\n';
  os << "seed," << (data.seed ? std::to_string(*data.seed) : std::string("none")) << '\n';
  os << "wave,receiver," << (dim == 3 ? "x,y,z" : "x,y") << ",re,im\n";
  for (std::size_t i = 0; i < data.data.size(); ++i) {
    for (std::size_t m = 0; m < data.data[i].size(); ++m) {
      os << i << ',' << m;
      for (int a = 0; a < dim; ++a) os << ',' << format_double(data.receivers.points[m][a]);
      os << ',' << format_double(data.data[i][m].real()) << ',' << format_double(data.data[i][m].imag()) << '\n';
    }
  }
}

MeasurementSet read_measurements(std::istream& is, const std::string& source) {
  CsvReader r(is, source);
  MeasurementSet out;
  out.k = r.to_double(r.expect("k", 2)[1], "k");
  const int dim = static_cast<int>(r.to_int(r.expect("dim", 2)[1], "dim"));
  if (dim != 2 && dim != 3) r.fail("dim", "must be 2 or 3");
  const auto geo = r.expect("geometry", 7);
  const Point center{r.to_double(geo[2], "geometry"), r.to_double(geo[3], "geometry"), r.to_double(geo[4], "geometry")};
  const double size = r.to_double(geo[5], "geometry");
  const int count = static_cast<int>(r.to_int(geo[6], "geometry"));
  try {
    if (geo[1] == "circle") {
      out.receivers = make_receivers_circle(center, size, count);
    } else if (geo[1] == "cube") {
      out.receivers = make_receivers_cube(center, size, count);
    } else {
      r.fail("geometry", "unknown receiver geometry '" + geo[1] + "'");
    }
  } catch (const std::invalid_argument& e) {
    r.fail("geometry", e.what());
  }
  if (out.receivers.dim != dim) r.fail("geometry", "geometry does not match dim");
  const auto nd = r.to_int(r.expect("directions", 2)[1], "directions");
  for (long long i = 0; i < nd; ++i) {
    const auto f = r.expect("direction", static_cast<std::size_t>(dim) + 1);
    Point d{0.0, 0.0, 0.0};
    for (int a = 0; a < dim; ++a) d[a] = r.to_double(f[a + 1], "direction");
    out.directions.push_back(d);
  }
  out.noise = r.to_double(r.expect("noise", 2)[1], "noise");
  const auto seed = r.expect("seed", 2)[1];
  if (seed != "none") out.seed = static_cast<std::uint64_t>(r.to_int(seed, "seed"));
  r.expect("wave", 2);
  const std::size_t nr = out.receivers.points.size();
  out.data.assign(static_cast<std::size_t>(nd), std::vector<Complex>(nr));
  std::vector<std::string> fields;
  std::size_t row = 0;
  while (r.next(fields)) {
    if (fields.size() != static_cast<std::size_t>(dim) + 4) r.fail("row", "wrong number of columns");
    const auto i = static_cast<std::size_t>(r.to_int(fields[0], "wave"));
    const auto m = static_cast<std::size_t>(r.to_int(fields[1], "receiver"));
    if (i * nr + m != row || i >= out.data.size() || m >= nr) r.fail("row", "rows out of order");
    out.data[i][m] = {r.to_double(fields[dim + 2], "re"), r.to_double(fields[dim + 3], "im")};
    ++row;
  }
  if (row != out.data.size() * nr) r.fail("row", "missing measurement rows");
  return out;
}

void write_diagnostics(std::ostream& os, const std::vector<IterationRecord>& history) {
  os << "iteration,active,inactive,complementarity,stationarity,objective\n";
  for (const auto& rec : history) {
    os << rec.iteration << ',' << rec.active << ',' << rec.inactive << ',' << format_double(rec.complementarity)
       << ',' << format_double(rec.stationarity) << ',' << format_double(rec.objective) << '\n';
  }
}

void save(const std::filesystem::path& path, const RealField& field) {
  auto os = open_out(path);
  write_field(os, field);
}
void save(const std::filesystem::path& path, const ComplexField& field) {
  auto os = open_out(path);
  write_field(os, field);
}
void save(const std::filesystem::path& path, const SubdomainMask& mask) {
  auto os = open_out(path);
  write_mask(os, mask);
}
void save(const std::filesystem::path& path, const MeasurementSet& data) {
  auto os = open_out(path);
  write_measurements(os, data);
}
void save(const std::filesystem::path& path, const std::vector<IterationRecord>& history) {
  auto os = open_out(path);
  write_diagnostics(os, history);
}

RealField load_real_field(const std::filesystem::path& path) {
  auto is = open_in(path);
  return read_real_field(is, path.string());
}
ComplexField load_complex_field(const std::filesystem::path& path) {
  auto is = open_in(path);
  return read_complex_field(is, path.string());
}
SubdomainMask load_mask(const std::filesystem::path& path) {
  auto is = open_in(path);
  return read_mask(is, path.string());
}
MeasurementSet load_measurements(const std::filesystem::path& path) {
  auto is = open_in(path);
  return read_measurements(is, path.string());
}

}  // namespace imsp::io
