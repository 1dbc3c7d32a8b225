#pragma once

#include <filesystem>

#include "sersrecon/scan.hpp"

namespace sers {

// Scan directory layout: one spectrum CSV per cell named r{row}_c{col}.csv,
// manifest.csv with header "index,row,col,x_mm,y_mm,file", and timing.json
// with dwell_s, move_s_per_step and total_s.
void save_scan_record(const ScanRecord& rec, const std::filesystem::path& dir);

// Reads a directory written by save_scan_record. The plan supplies the grid
// geometry; the manifest is validated against it.
ScanRecord load_scan_record(const std::filesystem::path& dir,
                            const ScanPlan& plan);

}  // namespace sers
