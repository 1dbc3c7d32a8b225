#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "sersrecon/spectrum.hpp"
#include "sersrecon/synth.hpp"

namespace sers {

using Point2 = std::array<double, 2>;  // (x, y) in mm

struct DiskRegion {
  Point2 center_mm{0.0, 0.0};
  double radius_mm = 1.0;
  std::string material;
};

// Labeled disks on the phantom plane. Later regions occlude earlier ones
// where they overlap; everything else is background_material. Materials in
// positive_labels count as Cy 7.5 for ground truth and metrics.
struct PhantomLayout {
  std::vector<DiskRegion> regions;
  std::string background_material;
  std::vector<std::string> positive_labels;

  bool is_positive(const std::string& label) const;
};

// Center disk of 20 mm diameter flanked by two 5 mm fiducials, each 10 mm
// edge-to-edge from it along x; one fiducial carries the reporter, the other
// only green dye. Matches default_materials() labels.
PhantomLayout default_phantom_layout();

enum class ScanPattern { kUnidirectional, kSerpentine };

struct ScanPlan {
  Point2 origin_mm{-29.5, -14.5};  // center of cell (row 0, col 0)
  int n_cols = 60;
  int n_rows = 30;
  double step_mm = 1.0;
  double dwell_s = 0.350;
  double move_s_per_step = 0.0;
  ScanPattern pattern = ScanPattern::kUnidirectional;
};

void validate(const ScanPlan& p);

struct GridPosition {
  int index = 0;
  int row = 0;
  int col = 0;
  double x_mm = 0.0;
  double y_mm = 0.0;
};

// Row-major cell-center positions; serpentine reverses odd rows.
std::vector<GridPosition> plan_raster(const ScanPlan& p);

// Laser spot approximated as a disk.
struct SpotModel {
  double radius_mm = 0.5;
};

// Area of the lens formed by two overlapping circles.
double circle_overlap_area(const Point2& c0, double r0, const Point2& c1,
                           double r1);

// Fraction of the spot disk covered by each material, keyed by label; the
// remainder goes to the background material. Overlaps are claimed in reverse
// region order (topmost first), which is exact whenever regions are pairwise
// disjoint inside the spot.
std::map<std::string, double> material_fractions_at(const PhantomLayout& layout,
                                                    const Point2& point_mm,
                                                    const SpotModel& spot);

// One simulated acquisition: the area-weighted mixture of per-material clean
// spectra, plus one Gaussian noise draw after mixing with sigma equal to the
// fraction-weighted noise_sigma_rel times the clean mixture maximum.
Spectrum acquire(const PhantomLayout& layout,
                 const std::vector<MaterialSpec>& materials,
                 const Point2& point_mm, const SpotModel& spot,
                 const std::vector<double>& axis_nm, std::uint64_t seed);

struct Acquisition {
  int index = 0;
  int row = 0;
  int col = 0;
  double x_mm = 0.0;
  double y_mm = 0.0;
  Spectrum spectrum;
};

struct ScanRecord {
  ScanPlan plan;
  std::vector<Acquisition> acquisitions;
  double total_time_s = 0.0;
};

// n_cols * n_rows acquisitions in plan order; total_time_s =
// count * dwell_s + (count - 1) * move_s_per_step.
ScanRecord simulate_scan(const PhantomLayout& layout,
                         const std::vector<MaterialSpec>& materials,
                         const ScanPlan& plan, const SpotModel& spot,
                         const std::vector<double>& axis_nm, std::uint64_t seed);

// Sum of positive-region disk areas minus pairwise overlaps between positive
// regions. Exact for layouts whose negative regions do not cover positive
// ones (triple overlaps are not modeled).
double analytic_positive_area(const PhantomLayout& layout);

}  // namespace sers
