#include "sersrecon/spectrum_io.hpp"

#include <fstream>
#include <stdexcept>
#include <string>

#include "text_util.hpp"

namespace sers {

void write_spectrum_csv(const std::filesystem::path& path, const Spectrum& s) {
  validate(s);
  std::ofstream out(path);
  if (!out)
    throw std::runtime_error("cannot open for writing: " + path.string());
  out << "wavelength_nm,intensity\n";
  for (std::size_t i = 0; i < s.size(); ++i)
    out << detail::format_double(s.wavelengths_nm[i]) << ','
        << detail::format_double(s.intensities[i]) << '\n';
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

Spectrum read_spectrum_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open: " + path.string());

  std::string line;
  if (!std::getline(in, line) ||
      detail::trim(line) != std::string_view("wavelength_nm,intensity"))
    throw std::runtime_error(path.string() +
                             ": missing 'wavelength_nm,intensity' header");

  Spectrum s;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    const auto sv = detail::trim(line);
    if (sv.empty()) continue;
    const auto comma = sv.find(',');
    double lambda = 0.0, intensity = 0.0;
    if (comma == std::string_view::npos ||
        !detail::parse_double(sv.substr(0, comma), lambda) ||
        !detail::parse_double(sv.substr(comma + 1), intensity))
      throw std::runtime_error(path.string() + ": bad data at line " +
                               std::to_string(line_no));
    if (!s.wavelengths_nm.empty() && !(lambda > s.wavelengths_nm.back()))
      throw std::runtime_error(path.string() +
                               ": non-increasing wavelength at line " +
                               std::to_string(line_no));
    s.wavelengths_nm.push_back(lambda);
    s.intensities.push_back(intensity);
  }
  validate(s);
  return s;
}

}  // namespace sers
