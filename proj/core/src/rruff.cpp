#include "sersrecon/rruff.hpp"

#include <sstream>
#include <stdexcept>

#include "text_util.hpp"

namespace sers {

RruffRecord parse_rruff(const std::string& text) {
  RruffRecord rec;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  bool ended = false;

  while (!ended && std::getline(in, line)) {
    ++line_no;
    const auto sv = detail::trim(line);
    if (sv.empty()) continue;

    if (sv.starts_with("##")) {
      const auto body = sv.substr(2);
      const auto eq = body.find('=');
      const std::string key{eq == std::string_view::npos ? body
                                                         : body.substr(0, eq)};
      const std::string value{eq == std::string_view::npos
                                  ? std::string_view{}
                                  : detail::trim(body.substr(eq + 1))};
      if (key == "END") {
        ended = true;
      } else {
        rec.metadata[key] = value;
        if (key == "NAMES") rec.name = value;
      }
      continue;
    }

    const auto comma = sv.find(',');
    double x = 0.0, y = 0.0;
    if (comma == std::string_view::npos ||
        !detail::parse_double(sv.substr(0, comma), x) ||
        !detail::parse_double(sv.substr(comma + 1), y))
      throw std::runtime_error("rruff: bad data at line " +
                               std::to_string(line_no));
    if (!rec.spectrum.wavelengths_nm.empty() &&
        !(x > rec.spectrum.wavelengths_nm.back()))
      throw std::runtime_error("rruff: non-increasing x at line " +
                               std::to_string(line_no));
    rec.spectrum.wavelengths_nm.push_back(x);
    rec.spectrum.intensities.push_back(y);
  }

  if (rec.spectrum.size() == 0) throw std::runtime_error("rruff: empty spectrum");
  validate(rec.spectrum);
  return rec;
}

std::string serialize_rruff(const RruffRecord& rec) {
  validate(rec.spectrum);
  std::ostringstream out;
  if (!rec.name.empty() && !rec.metadata.contains("NAMES"))
    out << "##NAMES=" << rec.name << '\n';
  for (const auto& [key, value] : rec.metadata)
    out << "##" << key << '=' << value << '\n';
  for (std::size_t i = 0; i < rec.spectrum.size(); ++i)
    out << detail::format_double(rec.spectrum.wavelengths_nm[i]) << ", "
        << detail::format_double(rec.spectrum.intensities[i]) << '\n';
  out << "##END=\n";
  return out.str();
}

}  // namespace sers
