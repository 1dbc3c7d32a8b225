#include "sersrecon/scan_io.hpp"

#include <cstdio>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

#include "sersrecon/spectrum_io.hpp"
#include "text_util.hpp"

namespace sers {

namespace fs = std::filesystem;

namespace {

std::string cell_filename(int row, int col) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "r%d_c%d.csv", row, col);
  return buf;
}

}  // namespace

void save_scan_record(const ScanRecord& rec, const fs::path& dir) {
  validate(rec.plan);
  if (rec.acquisitions.size() !=
      static_cast<std::size_t>(rec.plan.n_cols) * rec.plan.n_rows)
    throw std::invalid_argument("scan record: acquisition count != grid size");
  fs::create_directories(dir);

  std::ofstream manifest(dir / "manifest.csv");
  if (!manifest)
    throw std::runtime_error("cannot open for writing: " +
                             (dir / "manifest.csv").string());
  manifest << "index,row,col,x_mm,y_mm,file\n";
  for (const Acquisition& a : rec.acquisitions) {
    const std::string file = cell_filename(a.row, a.col);
    write_spectrum_csv(dir / file, a.spectrum);
    manifest << a.index << ',' << a.row << ',' << a.col << ','
             << detail::format_double(a.x_mm) << ','
             << detail::format_double(a.y_mm) << ',' << file << '\n';
  }

  nlohmann::ordered_json timing;
  timing["dwell_s"] = rec.plan.dwell_s;
  timing["move_s_per_step"] = rec.plan.move_s_per_step;
  timing["total_s"] = rec.total_time_s;
  std::ofstream tf(dir / "timing.json");
  if (!tf)
    throw std::runtime_error("cannot open for writing: " +
                             (dir / "timing.json").string());
  tf << timing.dump(2) << '\n';
}

ScanRecord load_scan_record(const fs::path& dir, const ScanPlan& plan) {
  validate(plan);
  std::ifstream manifest(dir / "manifest.csv");
  if (!manifest)
    throw std::runtime_error("cannot open: " + (dir / "manifest.csv").string());

  std::string line;
  if (!std::getline(manifest, line) ||
      detail::trim(line) != std::string_view("index,row,col,x_mm,y_mm,file"))
    throw std::runtime_error((dir / "manifest.csv").string() +
                             ": missing manifest header");

  ScanRecord rec;
  rec.plan = plan;
  int line_no = 1;
  while (std::getline(manifest, line)) {
    ++line_no;
    const auto sv = detail::trim(line);
    if (sv.empty()) continue;

    std::array<std::string, 6> field;
    std::size_t start = 0;
    for (int f = 0; f < 6; ++f) {
      const auto comma = f < 5 ? sv.find(',', start) : std::string_view::npos;
      if (f < 5 && comma == std::string_view::npos)
        throw std::runtime_error((dir / "manifest.csv").string() +
                                 ": bad row at line " + std::to_string(line_no));
      field[f] = std::string(
          sv.substr(start, comma == std::string_view::npos ? sv.size() - start
                                                           : comma - start));
      start = comma + 1;
    }

    const auto parse_num = [&](const std::string& text) {
      double v = 0.0;
      if (!detail::parse_double(text, v))
        throw std::runtime_error((dir / "manifest.csv").string() +
                                 ": bad number at line " +
                                 std::to_string(line_no));
      return v;
    };

    Acquisition a;
    a.index = static_cast<int>(parse_num(field[0]));
    a.row = static_cast<int>(parse_num(field[1]));
    a.col = static_cast<int>(parse_num(field[2]));
    a.x_mm = parse_num(field[3]);
    a.y_mm = parse_num(field[4]);

    if (a.row < 0 || a.row >= plan.n_rows || a.col < 0 || a.col >= plan.n_cols)
      throw std::runtime_error((dir / "manifest.csv").string() +
                               ": cell outside plan at line " +
                               std::to_string(line_no));
    a.spectrum = read_spectrum_csv(dir / field[5]);
    rec.acquisitions.push_back(std::move(a));
  }

  if (rec.acquisitions.size() !=
      static_cast<std::size_t>(plan.n_cols) * plan.n_rows)
    throw std::runtime_error(dir.string() + ": manifest count " +
                             std::to_string(rec.acquisitions.size()) +
                             " does not match plan grid");

  std::ifstream tf(dir / "timing.json");
  if (!tf) throw std::runtime_error("cannot open: " + (dir / "timing.json").string());
  try {
    nlohmann::json timing;
    tf >> timing;
    rec.total_time_s = timing.at("total_s").get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error((dir / "timing.json").string() + ": " + e.what());
  }
  return rec;
}

}  // namespace sers
