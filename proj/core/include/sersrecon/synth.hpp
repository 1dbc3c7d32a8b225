#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "sersrecon/spectrum.hpp"

namespace sers {

enum class PeakShape { kGaussian, kLorentzian };

struct PeakModel {
  double center_nm = 0.0;
  double fwhm_nm = 1.0;
  double amplitude = 1.0;
  PeakShape shape = PeakShape::kGaussian;
};

// Peak profile value at lambda_nm (amplitude at center, half at +-fwhm/2).
double peak_value(const PeakModel& p, double lambda_nm);

// One synthesizable material class. The random cubic baseline is defined on
// the axis rescaled to [-1, 1]: b(t) = c0 + c1 t + c2 t^2 + c3 t^3 with each
// coefficient drawn uniformly from its [lo, hi] range. noise_sigma_rel is the
// additive Gaussian noise sigma as a fraction of the clean signal maximum.
struct MaterialSpec {
  std::string label;
  std::vector<PeakModel> peaks;
  std::array<std::array<double, 2>, 4> baseline_coeff_ranges{
      {{0.0, 0.0}, {0.0, 0.0}, {0.0, 0.0}, {0.0, 0.0}}};
  double noise_sigma_rel = 0.0;
};

// Labeled samples in raw and/or preprocessed form. make_dataset fills
// spectra; preprocess_dataset fills features.
struct LabeledDataset {
  std::vector<Spectrum> spectra;
  std::vector<FeatureVector> features;
  std::vector<int> labels;
  std::vector<std::string> class_names;

  std::size_t size() const { return labels.size(); }
};

// Inclusive uniform axis start..stop with the given step.
std::vector<double> make_axis(double start_nm, double stop_nm, double step_nm);

// baseline + sum of peaks + noise, deterministic in (m, axis, seed).
Spectrum synth_spectrum(const MaterialSpec& m, const std::vector<double>& axis_nm,
                        std::uint64_t seed);

// Clean (noise-free) variant used for area-weighted mixing; equals
// synth_spectrum with noise_sigma_rel = 0 and the same seed.
Spectrum synth_spectrum_clean(const MaterialSpec& m,
                              const std::vector<double>& axis_nm,
                              std::uint64_t seed);

// (1-f)*a + f*b on a shared axis.
Spectrum mix_spectra(const Spectrum& a, const Spectrum& b, double f);

// n_per_class spectra per material, label = material index, per-sample seed
// derived from (seed, class, index). Class-major sample order.
LabeledDataset make_dataset(const std::vector<MaterialSpec>& materials,
                            int n_per_class, const std::vector<double>& axis_nm,
                            std::uint64_t seed);

// Runs the preprocessing chain over every raw spectrum.
LabeledDataset preprocess_dataset(const LabeledDataset& raw,
                                  const SpectralWindow& w,
                                  const BaselineConfig& cfg, int n_features);

// Built-in material set: three agarose surrogates (control, Cy 7.5, green
// dye, the latter spectrally identical to control) and four disjoint-peak
// mineral surrogates for pretraining. Peak positions are synthetic defaults,
// not measured values.
std::vector<MaterialSpec> default_materials();

const MaterialSpec& find_material(const std::vector<MaterialSpec>& materials,
                                  const std::string& label);

}  // namespace sers
