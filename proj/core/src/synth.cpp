#include "sersrecon/synth.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

#include "sersrecon/rng.hpp"

namespace sers {

namespace {

constexpr double kFourLn2 = 2.7725887222397812;  // 4 ln 2

void check_axis(const std::vector<double>& axis) {
  if (axis.size() < 2)
    throw std::invalid_argument("synth: axis needs at least 2 points");
  for (std::size_t i = 1; i < axis.size(); ++i)
    if (!(axis[i] > axis[i - 1]))
      throw std::invalid_argument("synth: axis must be strictly increasing");
}

Spectrum synth_impl(const MaterialSpec& m, const std::vector<double>& axis,
                    std::uint64_t seed, bool with_noise) {
  check_axis(axis);
  for (const PeakModel& p : m.peaks)
    if (!(p.fwhm_nm > 0.0) || p.amplitude < 0.0)
      throw std::invalid_argument("synth: invalid peak model in " + m.label);

  Rng rng(derive_seed(seed, 0x5e5));
  std::array<double, 4> c{};
  for (int k = 0; k < 4; ++k)
    c[k] = rng.uniform(m.baseline_coeff_ranges[k][0], m.baseline_coeff_ranges[k][1]);

  const double lo = axis.front();
  const double hi = axis.back();
  const double mid = 0.5 * (lo + hi);
  const double half = 0.5 * (hi - lo);

  Spectrum s;
  s.wavelengths_nm = axis;
  s.intensities.resize(axis.size());
  double clean_max = 0.0;
  for (std::size_t i = 0; i < axis.size(); ++i) {
    const double t = (axis[i] - mid) / half;
    double v = c[0] + t * (c[1] + t * (c[2] + t * c[3]));
    for (const PeakModel& p : m.peaks) v += peak_value(p, axis[i]);
    s.intensities[i] = v;
    clean_max = std::max(clean_max, std::fabs(v));
  }

  if (with_noise && m.noise_sigma_rel > 0.0) {
    const double sigma = m.noise_sigma_rel * clean_max;
    for (double& v : s.intensities) v += sigma * rng.normal();
  }
  return s;
}

}  // namespace

double peak_value(const PeakModel& p, double lambda_nm) {
  const double d = lambda_nm - p.center_nm;
  switch (p.shape) {
    case PeakShape::kGaussian:
      return p.amplitude * std::exp(-kFourLn2 * d * d / (p.fwhm_nm * p.fwhm_nm));
    case PeakShape::kLorentzian: {
      const double gamma = 0.5 * p.fwhm_nm;
      return p.amplitude * gamma * gamma / (d * d + gamma * gamma);
    }
  }
  return 0.0;
}

std::vector<double> make_axis(double start_nm, double stop_nm, double step_nm) {
  if (!(step_nm > 0.0) || !(stop_nm > start_nm))
    throw std::invalid_argument("make_axis: need stop > start and step > 0");
  std::vector<double> axis;
  const int n = static_cast<int>(std::floor((stop_nm - start_nm) / step_nm + 0.5)) + 1;
  axis.reserve(n);
  for (int i = 0; i < n; ++i) {
    const double v = start_nm + i * step_nm;
    if (v > stop_nm + 0.5 * step_nm) break;
    axis.push_back(v);
  }
  return axis;
}

Spectrum synth_spectrum(const MaterialSpec& m, const std::vector<double>& axis_nm,
                        std::uint64_t seed) {
  return synth_impl(m, axis_nm, seed, true);
}

Spectrum synth_spectrum_clean(const MaterialSpec& m,
                              const std::vector<double>& axis_nm,
                              std::uint64_t seed) {
  return synth_impl(m, axis_nm, seed, false);
}

Spectrum mix_spectra(const Spectrum& a, const Spectrum& b, double f) {
  validate(a);
  validate(b);
  if (a.wavelengths_nm != b.wavelengths_nm)
    throw std::invalid_argument("mix_spectra: axis mismatch");
  if (!(f >= 0.0 && f <= 1.0))
    throw std::invalid_argument("mix_spectra: f must be in [0, 1]");

  Spectrum out;
  out.wavelengths_nm = a.wavelengths_nm;
  out.intensities.resize(a.size());
  for (std::size_t i = 0; i < a.size(); ++i)
    out.intensities[i] = (1.0 - f) * a.intensities[i] + f * b.intensities[i];
  return out;
}

LabeledDataset make_dataset(const std::vector<MaterialSpec>& materials,
                            int n_per_class, const std::vector<double>& axis_nm,
                            std::uint64_t seed) {
  if (materials.size() < 2)
    throw std::invalid_argument("make_dataset: need at least 2 materials");
  if (n_per_class < 1)
    throw std::invalid_argument("make_dataset: n_per_class must be >= 1");
  std::set<std::string> labels;
  for (const MaterialSpec& m : materials)
    if (!labels.insert(m.label).second)
      throw std::invalid_argument("make_dataset: duplicate label " + m.label);

  LabeledDataset ds;
  for (std::size_t c = 0; c < materials.size(); ++c) {
    ds.class_names.push_back(materials[c].label);
    for (int i = 0; i < n_per_class; ++i) {
      ds.spectra.push_back(
          synth_spectrum(materials[c], axis_nm, derive_seed(seed, c, i)));
      ds.labels.push_back(static_cast<int>(c));
    }
  }
  return ds;
}

LabeledDataset preprocess_dataset(const LabeledDataset& raw,
                                  const SpectralWindow& w,
                                  const BaselineConfig& cfg, int n_features) {
  if (raw.spectra.size() != raw.labels.size())
    throw std::invalid_argument("preprocess_dataset: raw spectra required");
  LabeledDataset out;
  out.labels = raw.labels;
  out.class_names = raw.class_names;
  out.features.reserve(raw.spectra.size());
  for (const Spectrum& s : raw.spectra)
    out.features.push_back(preprocess(s, w, cfg, n_features).features);
  return out;
}

std::vector<MaterialSpec> default_materials() {
  const std::array<std::array<double, 2>, 4> agarose_bg{
      {{0.8, 1.2}, {-0.3, 0.3}, {-0.2, 0.2}, {-0.1, 0.1}}};
  const std::array<std::array<double, 2>, 4> mineral_bg{
      {{0.3, 0.6}, {-0.2, 0.2}, {-0.1, 0.1}, {-0.05, 0.05}}};

  std::vector<MaterialSpec> mats;

  MaterialSpec control;
  control.label = "control_agarose";
  control.peaks = {{836.0, 16.0, 0.40, PeakShape::kGaussian},
                   {883.0, 20.0, 0.32, PeakShape::kGaussian}};
  control.baseline_coeff_ranges = agarose_bg;
  control.noise_sigma_rel = 0.01;
  mats.push_back(control);

  MaterialSpec cy75;
  cy75.label = "cy75_agarose";
  cy75.peaks = {{823.0, 4.5, 1.10, PeakShape::kGaussian},
                {848.0, 5.0, 1.50, PeakShape::kGaussian},
                {872.0, 4.0, 1.20, PeakShape::kGaussian},
                {901.0, 6.0, 0.95, PeakShape::kLorentzian}};
  cy75.baseline_coeff_ranges = agarose_bg;
  cy75.noise_sigma_rel = 0.01;
  mats.push_back(cy75);

  // Same peak structure as control: the green fiducial differs only in color,
  // which the spectra do not encode.
  MaterialSpec green = control;
  green.label = "green_dye_agarose";
  mats.push_back(green);

  MaterialSpec a;
  a.label = "mineral_a";
  a.peaks = {{818.0, 3.0, 1.20, PeakShape::kGaussian},
             {846.0, 5.0, 0.90, PeakShape::kGaussian},
             {869.0, 4.0, 1.00, PeakShape::kGaussian}};
  a.baseline_coeff_ranges = mineral_bg;
  a.noise_sigma_rel = 0.01;
  mats.push_back(a);

  MaterialSpec b;
  b.label = "mineral_b";
  b.peaks = {{827.0, 4.0, 1.00, PeakShape::kGaussian},
             {858.0, 3.0, 1.30, PeakShape::kLorentzian},
             {886.0, 5.0, 0.80, PeakShape::kGaussian}};
  b.baseline_coeff_ranges = mineral_bg;
  b.noise_sigma_rel = 0.01;
  mats.push_back(b);

  MaterialSpec c;
  c.label = "mineral_c";
  c.peaks = {{838.0, 5.0, 0.90, PeakShape::kGaussian},
             {877.0, 3.0, 1.10, PeakShape::kGaussian},
             {908.0, 4.0, 1.00, PeakShape::kGaussian}};
  c.baseline_coeff_ranges = mineral_bg;
  c.noise_sigma_rel = 0.01;
  mats.push_back(c);

  MaterialSpec d;
  d.label = "mineral_d";
  d.peaks = {{814.0, 4.0, 0.80, PeakShape::kGaussian},
             {852.0, 6.0, 1.00, PeakShape::kGaussian},
             {893.0, 3.0, 1.20, PeakShape::kGaussian},
             {915.0, 5.0, 0.70, PeakShape::kGaussian}};
  d.baseline_coeff_ranges = mineral_bg;
  d.noise_sigma_rel = 0.01;
  mats.push_back(d);

  return mats;
}

const MaterialSpec& find_material(const std::vector<MaterialSpec>& materials,
                                  const std::string& label) {
  for (const MaterialSpec& m : materials)
    if (m.label == label) return m;
  throw std::invalid_argument("unknown material label: " + label);
}

}  // namespace sers
