#include "sersrecon/dataset_io.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <stdexcept>

#include "sersrecon/spectrum_io.hpp"
#include "text_util.hpp"

namespace sers {

namespace fs = std::filesystem;

void save_dataset(const LabeledDataset& ds, const fs::path& dir) {
  if (ds.spectra.size() != ds.labels.size())
    throw std::invalid_argument("save_dataset: raw spectra required");
  fs::create_directories(dir);

  std::ofstream labels(dir / "labels.csv");
  if (!labels)
    throw std::runtime_error("cannot open for writing: " +
                             (dir / "labels.csv").string());
  labels << "filename,label,class_name\n";

  std::vector<int> counter(ds.class_names.size(), 0);
  for (std::size_t i = 0; i < ds.size(); ++i) {
    const int label = ds.labels[i];
    if (label < 0 || label >= static_cast<int>(ds.class_names.size()))
      throw std::invalid_argument("save_dataset: label out of range");
    char name[256];
    std::snprintf(name, sizeof(name), "%s_%04d.csv",
                  ds.class_names[label].c_str(), counter[label]++);
    write_spectrum_csv(dir / name, ds.spectra[i]);
    labels << name << ',' << label << ',' << ds.class_names[label] << '\n';
  }
}

LabeledDataset load_dataset(const fs::path& dir) {
  std::ifstream labels(dir / "labels.csv");
  if (!labels)
    throw std::runtime_error("cannot open: " + (dir / "labels.csv").string());

  std::string line;
  if (!std::getline(labels, line) ||
      detail::trim(line) != std::string_view("filename,label,class_name"))
    throw std::runtime_error((dir / "labels.csv").string() +
                             ": missing 'filename,label,class_name' header");

  LabeledDataset ds;
  int line_no = 1;
  while (std::getline(labels, line)) {
    ++line_no;
    const auto sv = detail::trim(line);
    if (sv.empty()) continue;
    const auto c1 = sv.find(',');
    const auto c2 = c1 == std::string_view::npos ? c1 : sv.find(',', c1 + 1);
    if (c2 == std::string_view::npos)
      throw std::runtime_error((dir / "labels.csv").string() +
                               ": bad row at line " + std::to_string(line_no));
    const std::string filename{sv.substr(0, c1)};
    const std::string label_str{sv.substr(c1 + 1, c2 - c1 - 1)};
    const std::string class_name{sv.substr(c2 + 1)};

    double label_val = 0.0;
    if (!detail::parse_double(label_str, label_val) ||
        label_val != static_cast<int>(label_val) || label_val < 0)
      throw std::runtime_error((dir / "labels.csv").string() +
                               ": bad label at line " + std::to_string(line_no));
    const int label = static_cast<int>(label_val);

    if (label >= static_cast<int>(ds.class_names.size()))
      ds.class_names.resize(label + 1);
    if (ds.class_names[label].empty())
      ds.class_names[label] = class_name;
    else if (ds.class_names[label] != class_name)
      throw std::runtime_error((dir / "labels.csv").string() +
                               ": conflicting class name at line " +
                               std::to_string(line_no));

    ds.spectra.push_back(read_spectrum_csv(dir / filename));
    ds.labels.push_back(label);
  }
  if (ds.size() == 0)
    throw std::runtime_error((dir / "labels.csv").string() + ": empty dataset");
  return ds;
}

}  // namespace sers
