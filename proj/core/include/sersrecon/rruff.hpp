#pragma once

#include <map>
#include <string>

#include "sersrecon/spectrum.hpp"

namespace sers {

// One record of the RRUFF ASCII layout: "##KEY=VALUE" header lines, then
// comma-separated "x, y" data lines, terminated by "##END". The axis unit
// (cm^-1 or nm) is whatever the file declares; it is carried as-is.
struct RruffRecord {
  std::string name;
  std::map<std::string, std::string> metadata;
  Spectrum spectrum;
};

// Throws std::runtime_error on empty spectra, non-numeric data lines (the
// message names the line number) and non-increasing x values.
RruffRecord parse_rruff(const std::string& text);

// Inverse of parse_rruff; values are printed so they round-trip exactly.
std::string serialize_rruff(const RruffRecord& rec);

}  // namespace sers
