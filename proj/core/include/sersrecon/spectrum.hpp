#pragma once

#include <cstddef>
#include <vector>

namespace sers {

// A single acquisition: a strictly increasing wavelength axis (nm) paired
// with intensity values in arbitrary counts units.
struct Spectrum {
  std::vector<double> wavelengths_nm;
  std::vector<double> intensities;

  std::size_t size() const { return wavelengths_nm.size(); }
};

// Throws std::invalid_argument unless the axis and intensities have equal
// length >= 2 and the axis is strictly increasing.
void validate(const Spectrum& s);

// Inclusive wavelength band kept by crop_window.
struct SpectralWindow {
  double lo_nm = 810.0;
  double hi_nm = 920.0;
};

// Fixed-length vector with every value in [0, 1]; the classifier input.
struct FeatureVector {
  std::vector<double> values;
};

// Settings for the iterative modified-polyfit baseline estimate.
struct BaselineConfig {
  int order = 3;
  int max_iterations = 100;
  // Convergence threshold on max|fit_k - fit_{k-1}| / (max|fit_k| + 1e-12).
  double tolerance = 1e-6;
};

struct NormalizeResult {
  Spectrum spectrum;
  // Set when max == min within floating tolerance; outputs are then all zero.
  bool flat = false;
};

struct PreprocessResult {
  FeatureVector features;
  bool flat = false;
};

// Keep only samples with lo_nm <= lambda <= hi_nm, order preserved.
// Throws if fewer than 2 samples remain ("window too narrow for axis").
Spectrum crop_window(const Spectrum& s, const SpectralWindow& w);

// Baseline estimate on the same axis. Repeats a least-squares polynomial
// fit of degree cfg.order against the working signal, clips the working
// signal to the fit minimum each round, and stops when the fit change
// falls below cfg.tolerance or max_iterations is reached. The fit uses an
// axis rescaled to [-1, 1] for conditioning.
Spectrum modpoly_baseline(const Spectrum& s, const BaselineConfig& cfg);

// intensities - baseline with negatives clamped to zero. The two axes
// must be exactly equal.
Spectrum correct_baseline(const Spectrum& s, const Spectrum& baseline);

// (I - min) / (max - min). A flat input yields all zeros plus the flat
// flag instead of an error; near-boundary scan points can legitimately
// produce flat residuals.
NormalizeResult minmax_normalize(const Spectrum& s);

// n values at uniformly spaced wavelengths spanning the input's own first
// and last axis points, linearly interpolated; endpoints are reproduced
// exactly. Requires n >= 2.
FeatureVector resample_linear(const Spectrum& s, int n);

// Full chain: crop -> baseline removal -> min-max normalize -> resample.
PreprocessResult preprocess(const Spectrum& raw, const SpectralWindow& w,
                            const BaselineConfig& cfg, int n_features);

// Raman shift in cm^-1: 1e7 * (1/excitation_nm - 1/lambda_nm).
double wavelength_to_raman_shift(double lambda_nm, double excitation_nm);

}  // namespace sers
