#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "sersrecon/net.hpp"
#include "sersrecon/scan.hpp"
#include "sersrecon/spectrum.hpp"

namespace sers {

// Binary reconstruction grid: labels[row * n_cols + col] in {0, 1},
// 1 = Cy 7.5. origin_mm is the center of cell (0, 0).
struct LabelGrid {
  int n_cols = 0;
  int n_rows = 0;
  double cell_mm = 1.0;
  Point2 origin_mm{0.0, 0.0};
  std::vector<std::uint8_t> labels;

  std::uint8_t at(int row, int col) const { return labels[row * n_cols + col]; }
  std::uint8_t& at(int row, int col) { return labels[row * n_cols + col]; }
  bool same_geometry(const LabelGrid& other) const;
};

LabelGrid make_grid(const ScanPlan& plan);

// preprocess -> forward -> argmax for every acquisition; errors are
// re-thrown with the offending cell coordinates. Requires a binary network.
LabelGrid classify_scan(const Network& net, const ScanRecord& rec,
                        const SpectralWindow& w, const BaselineConfig& cfg,
                        int n_features);

// Cell is 1 iff its center lies inside a region (topmost wins) whose
// material is in positive_labels.
LabelGrid rasterize_truth(const PhantomLayout& layout, const ScanPlan& plan);

double predicted_area_mm2(const LabelGrid& g);

// 100 * (1 - |predicted - expected| / expected), floored at 0.
double area_accuracy_pct(const LabelGrid& pred, double expected_area_mm2);

// |pred AND truth| / |pred OR truth|; 1 when both masks are empty.
double iou(const LabelGrid& pred, const LabelGrid& truth);

// Positive cells with at least one negative or off-grid 4-neighbor.
LabelGrid extract_boundary(const LabelGrid& g);

// IoU of the two boundary sets after dilating each by tol_cells (Chebyshev
// neighborhood); tol_cells = 0 is the raw boundary IoU.
double boundary_iou(const LabelGrid& pred, const LabelGrid& truth, int tol_cells = 1);

struct FeatureGeometry {
  double center_diameter_mm = 0.0;  // x extent of the largest component
  double edge_to_edge_mm = 0.0;     // x gap to the nearest other component
};

// Measures along the fiducial axis (x) over 4-connected components.
// Throws "insufficient components" when fewer than 2 exist.
FeatureGeometry feature_metrics(const LabelGrid& g);

struct MetricsReport {
  double predicted_area_mm2 = 0.0;
  double expected_area_mm2 = 0.0;
  double area_accuracy_pct = 0.0;
  double iou = 0.0;
  double boundary_iou = 0.0;       // tol_cells = 1
  double boundary_iou_tol0 = 0.0;  // tol_cells = 0
  double center_diameter_mm = 0.0;
  double edge_to_edge_mm = 0.0;
  double scan_time_s = 0.0;
};

MetricsReport compute_metrics(const LabelGrid& pred, const LabelGrid& truth,
                              double expected_area_mm2, double scan_time_s);

// Emits prediction.pgm and truth.pgm (plain PGM P2, positive = 255, top row
// = highest y), labels.csv ("row,col,label", row-major) and metrics.json.
void write_outputs(const LabelGrid& pred, const LabelGrid& truth,
                   const MetricsReport& m, const std::filesystem::path& dir);

void write_label_grid_csv(const LabelGrid& g, const std::filesystem::path& path);

// Reads a labels.csv back onto the given plan geometry.
LabelGrid read_label_grid_csv(const std::filesystem::path& path,
                              const ScanPlan& plan);

}  // namespace sers
