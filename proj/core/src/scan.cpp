#include "sersrecon/scan.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "sersrecon/rng.hpp"

namespace sers {

namespace {

double sq(double v) { return v * v; }

double dist(const Point2& a, const Point2& b) {
  return std::hypot(a[0] - b[0], a[1] - b[1]);
}

}  // namespace

bool PhantomLayout::is_positive(const std::string& label) const {
  return std::find(positive_labels.begin(), positive_labels.end(), label) !=
         positive_labels.end();
}

PhantomLayout default_phantom_layout() {
  PhantomLayout layout;
  layout.background_material = "control_agarose";
  layout.positive_labels = {"cy75_agarose"};
  layout.regions = {
      {{0.0, 0.0}, 10.0, "cy75_agarose"},
      {{22.5, 0.0}, 2.5, "cy75_agarose"},
      {{-22.5, 0.0}, 2.5, "green_dye_agarose"},
  };
  return layout;
}

void validate(const ScanPlan& p) {
  if (p.n_cols < 1 || p.n_rows < 1)
    throw std::invalid_argument("scan plan: grid dimensions must be >= 1");
  if (!(p.step_mm > 0.0))
    throw std::invalid_argument("scan plan: step_mm must be > 0");
  if (p.dwell_s < 0.0 || p.move_s_per_step < 0.0)
    throw std::invalid_argument("scan plan: times must be >= 0");
}

std::vector<GridPosition> plan_raster(const ScanPlan& p) {
  validate(p);
  std::vector<GridPosition> out;
  out.reserve(static_cast<std::size_t>(p.n_cols) * p.n_rows);
  int index = 0;
  for (int row = 0; row < p.n_rows; ++row) {
    const bool reversed = p.pattern == ScanPattern::kSerpentine && (row % 2) == 1;
    for (int k = 0; k < p.n_cols; ++k) {
      const int col = reversed ? p.n_cols - 1 - k : k;
      out.push_back({index++, row, col, p.origin_mm[0] + col * p.step_mm,
                     p.origin_mm[1] + row * p.step_mm});
    }
  }
  return out;
}

double circle_overlap_area(const Point2& c0, double r0, const Point2& c1,
                           double r1) {
  if (!(r0 > 0.0) || !(r1 > 0.0))
    throw std::invalid_argument("circle_overlap_area: radii must be > 0");
  const double d = dist(c0, c1);
  if (d >= r0 + r1) return 0.0;
  const double rmin = std::min(r0, r1);
  if (d <= std::fabs(r0 - r1)) return M_PI * sq(rmin);

  const double cos0 = std::clamp((sq(d) + sq(r0) - sq(r1)) / (2.0 * d * r0), -1.0, 1.0);
  const double cos1 = std::clamp((sq(d) + sq(r1) - sq(r0)) / (2.0 * d * r1), -1.0, 1.0);
  const double kite = 0.5 * std::sqrt(std::max(
                                0.0, (-d + r0 + r1) * (d + r0 - r1) *
                                         (d - r0 + r1) * (d + r0 + r1)));
  return sq(r0) * std::acos(cos0) + sq(r1) * std::acos(cos1) - kite;
}

std::map<std::string, double> material_fractions_at(const PhantomLayout& layout,
                                                    const Point2& point_mm,
                                                    const SpotModel& spot) {
  if (!(spot.radius_mm > 0.0))
    throw std::invalid_argument("spot radius must be > 0");
  if (layout.background_material.empty())
    throw std::invalid_argument("layout: background material required");

  const double spot_area = M_PI * sq(spot.radius_mm);
  double remaining = spot_area;
  std::map<std::string, double> fractions;

  // Topmost regions claim their overlap first.
  for (auto it = layout.regions.rbegin(); it != layout.regions.rend(); ++it) {
    if (!(it->radius_mm > 0.0))
      throw std::invalid_argument("layout: region radius must be > 0");
    const double raw =
        circle_overlap_area(point_mm, spot.radius_mm, it->center_mm, it->radius_mm);
    const double claim = std::min(raw, remaining);
    if (claim > 0.0) {
      fractions[it->material] += claim / spot_area;
      remaining -= claim;
    }
  }
  if (remaining > 1e-12 * spot_area)
    fractions[layout.background_material] += remaining / spot_area;
  return fractions;
}

Spectrum acquire(const PhantomLayout& layout,
                 const std::vector<MaterialSpec>& materials,
                 const Point2& point_mm, const SpotModel& spot,
                 const std::vector<double>& axis_nm, std::uint64_t seed) {
  const auto fractions = material_fractions_at(layout, point_mm, spot);

  Spectrum mixed;
  mixed.wavelengths_nm = axis_nm;
  mixed.intensities.assign(axis_nm.size(), 0.0);
  double noise_rel = 0.0;
  std::size_t stream = 0;
  for (const auto& [label, fraction] : fractions) {
    const MaterialSpec& mat = find_material(materials, label);  // throws if unknown
    const Spectrum part =
        synth_spectrum_clean(mat, axis_nm, derive_seed(seed, 1, stream++));
    for (std::size_t i = 0; i < mixed.intensities.size(); ++i)
      mixed.intensities[i] += fraction * part.intensities[i];
    noise_rel += fraction * mat.noise_sigma_rel;
  }

  // One noise draw per acquisition, after mixing.
  if (noise_rel > 0.0) {
    double clean_max = 0.0;
    for (double v : mixed.intensities) clean_max = std::max(clean_max, std::fabs(v));
    const double sigma = noise_rel * clean_max;
    Rng rng(derive_seed(seed, 2));
    for (double& v : mixed.intensities) v += sigma * rng.normal();
  }
  return mixed;
}

ScanRecord simulate_scan(const PhantomLayout& layout,
                         const std::vector<MaterialSpec>& materials,
                         const ScanPlan& plan, const SpotModel& spot,
                         const std::vector<double>& axis_nm, std::uint64_t seed) {
  const std::vector<GridPosition> positions = plan_raster(plan);

  ScanRecord rec;
  rec.plan = plan;
  rec.acquisitions.reserve(positions.size());
  for (const GridPosition& pos : positions) {
    Acquisition a;
    a.index = pos.index;
    a.row = pos.row;
    a.col = pos.col;
    a.x_mm = pos.x_mm;
    a.y_mm = pos.y_mm;
    a.spectrum = acquire(layout, materials, {pos.x_mm, pos.y_mm}, spot, axis_nm,
                         derive_seed(seed, static_cast<std::uint64_t>(pos.index)));
    rec.acquisitions.push_back(std::move(a));
  }

  const auto n = static_cast<double>(positions.size());
  rec.total_time_s = n * plan.dwell_s + (n - 1.0) * plan.move_s_per_step;
  return rec;
}

double analytic_positive_area(const PhantomLayout& layout) {
  double area = 0.0;
  for (std::size_t i = 0; i < layout.regions.size(); ++i) {
    const DiskRegion& r = layout.regions[i];
    if (!layout.is_positive(r.material)) continue;
    area += M_PI * sq(r.radius_mm);
    for (std::size_t j = i + 1; j < layout.regions.size(); ++j) {
      const DiskRegion& s = layout.regions[j];
      if (!layout.is_positive(s.material)) continue;
      area -= circle_overlap_area(r.center_mm, r.radius_mm, s.center_mm, s.radius_mm);
    }
  }
  return area;
}

}  // namespace sers
