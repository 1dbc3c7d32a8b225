#pragma once

#include <filesystem>

#include "sersrecon/synth.hpp"

namespace sers {

// Dataset directory layout: one spectrum CSV per sample plus labels.csv with
// the header "filename,label,class_name". Requires the raw (spectrum) form.
void save_dataset(const LabeledDataset& ds, const std::filesystem::path& dir);

LabeledDataset load_dataset(const std::filesystem::path& dir);

}  // namespace sers
