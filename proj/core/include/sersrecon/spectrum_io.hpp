#pragma once

#include <filesystem>

#include "sersrecon/spectrum.hpp"

namespace sers {

// On-disk spectrum format: CSV with the exact header "wavelength_nm,intensity"
// and one sample per line. Values are written with 17 significant digits so a
// read-back reproduces the doubles bit for bit.
void write_spectrum_csv(const std::filesystem::path& path, const Spectrum& s);

// Throws std::runtime_error naming the file and offending line on bad input.
Spectrum read_spectrum_csv(const std::filesystem::path& path);

}  // namespace sers
