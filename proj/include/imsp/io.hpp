#pragma once

// Plain-text artifact formats. Every real number is written with 17
// significant digits, so a write/read cycle reproduces doubles exactly.
//
// Grid fields:
//   dim,<2|3>
//   origin_h,<x>,<y>[,<z>],<h>
//   counts,<nx>,<ny>[,<nz>]
//   i,j[,k],value            (real fields and 0/1 masks)
//   i,j[,k],re,im            (complex fields)
// with one row per cell in row-major order (last axis fastest).
//
// Measurements:
//   k,<k>
//   dim,<2|3>
//   geometry,circle,<cx>,<cy>,<cz>,<radius>,<count>
//   geometry,cube,<cx>,<cy>,<cz>,<width>,<per_axis>
//   directions,<count>
//   direction,<dx>,<dy>[,<dz>]          (once per wave)
//   noise,<eps>
//   seed,<integer|none>
//   wave,receiver,x,y[,z],re,im        (column header)
//   rows in wave-major, receiver-major order
//
// Newton diagnostics:
//   iteration,active,inactive,complementarity,stationarity,objective

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "imsp/forward.hpp"
#include "imsp/grid.hpp"
#include "imsp/inversion.hpp"

namespace imsp::io {

std::string format_double(double v);

void write_field(std::ostream& os, const RealField& field);
void write_field(std::ostream& os, const ComplexField& field);
void write_mask(std::ostream& os, const SubdomainMask& mask);
void write_measurements(std::ostream& os, const MeasurementSet& data);
void write_diagnostics(std::ostream& os, const std::vector<IterationRecord>& history);

RealField read_real_field(std::istream& is, const std::string& source = "<stream>");
ComplexField read_complex_field(std::istream& is, const std::string& source = "<stream>");
SubdomainMask read_mask(std::istream& is, const std::string& source = "<stream>");
MeasurementSet read_measurements(std::istream& is, const std::string& source = "<stream>");

// File conveniences; throw std::runtime_error when the file cannot be opened.
void save(const std::filesystem::path& path, const RealField& field);
void save(const std::filesystem::path& path, const ComplexField& field);
void save(const std::filesystem::path& path, const SubdomainMask& mask);
void save(const std::filesystem::path& path, const MeasurementSet& data);
void save(const std::filesystem::path& path, const std::vector<IterationRecord>& history);
RealField load_real_field(const std::filesystem::path& path);
ComplexField load_complex_field(const std::filesystem::path& path);
SubdomainMask load_mask(const std::filesystem::path& path);
MeasurementSet load_measurements(const std::filesystem::path& path);

}  // namespace imsp::io
