#include "sersrecon/spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace sers {

namespace {

// Least-squares polynomial fit of (x, y) evaluated back on x. Normal
// equations with Gaussian elimination; callers rescale x to [-1, 1] so a
// low degree stays well conditioned.
std::vector<double> polyfit_eval(const std::vector<double>& x,
                                 const std::vector<double>& y, int degree) {
  const int m = degree + 1;
  const std::size_t n = x.size();

  // Accumulate moments sum(x^k) for k in [0, 2*degree] and sum(y * x^k).
  std::vector<double> moments(2 * degree + 1, 0.0);
  std::vector<double> rhs(m, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    double p = 1.0;
    for (int k = 0; k <= 2 * degree; ++k) {
      moments[k] += p;
      if (k < m) rhs[k] += y[i] * p;
      p *= x[i];
    }
  }

  std::vector<double> a(static_cast<std::size_t>(m) * m);
  for (int r = 0; r < m; ++r)
    for (int c = 0; c < m; ++c) a[r * m + c] = moments[r + c];

  // Gaussian elimination with partial pivoting.
  std::vector<double> coeff = rhs;
  for (int col = 0; col < m; ++col) {
    int pivot = col;
    for (int r = col + 1; r < m; ++r)
      if (std::fabs(a[r * m + col]) > std::fabs(a[pivot * m + col])) pivot = r;
    if (a[pivot * m + col] == 0.0)
      throw std::runtime_error("polyfit: singular normal equations");
    if (pivot != col) {
      for (int c = col; c < m; ++c) std::swap(a[pivot * m + c], a[col * m + c]);
      std::swap(coeff[pivot], coeff[col]);
    }
    for (int r = col + 1; r < m; ++r) {
      const double f = a[r * m + col] / a[col * m + col];
      for (int c = col; c < m; ++c) a[r * m + c] -= f * a[col * m + c];
      coeff[r] -= f * coeff[col];
    }
  }
  for (int col = m - 1; col >= 0; --col) {
    for (int r = col + 1; r < m; ++r) coeff[col] -= a[col * m + r] * coeff[r];
    coeff[col] /= a[col * m + col];
  }

  std::vector<double> fit(n);
  for (std::size_t i = 0; i < n; ++i) {
    double acc = coeff[m - 1];
    for (int k = m - 2; k >= 0; --k) acc = acc * x[i] + coeff[k];
    fit[i] = acc;
  }
  return fit;
}

}  // namespace

void validate(const Spectrum& s) {
  if (s.wavelengths_nm.size() != s.intensities.size())
    throw std::invalid_argument("spectrum: axis/intensity length mismatch");
  if (s.size() < 2)
    throw std::invalid_argument("spectrum: fewer than 2 samples");
  for (std::size_t i = 1; i < s.size(); ++i)
    if (!(s.wavelengths_nm[i] > s.wavelengths_nm[i - 1]))
      throw std::invalid_argument(
          "spectrum: wavelengths must be strictly increasing");
}

Spectrum crop_window(const Spectrum& s, const SpectralWindow& w) {
  validate(s);
  if (!(w.lo_nm < w.hi_nm))
    throw std::invalid_argument("crop_window: lo_nm must be < hi_nm");

  Spectrum out;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double lambda = s.wavelengths_nm[i];
    if (lambda >= w.lo_nm && lambda <= w.hi_nm) {
      out.wavelengths_nm.push_back(lambda);
      out.intensities.push_back(s.intensities[i]);
    }
  }
  if (out.size() < 2)
    throw std::invalid_argument("crop_window: window too narrow for axis");
  return out;
}

Spectrum modpoly_baseline(const Spectrum& s, const BaselineConfig& cfg) {
  validate(s);
  if (cfg.order < 1 || cfg.max_iterations < 1 || !(cfg.tolerance > 0.0))
    throw std::invalid_argument("modpoly_baseline: invalid config");
  if (s.size() <= static_cast<std::size_t>(cfg.order))
    throw std::invalid_argument("modpoly_baseline: axis shorter than order + 1");
  for (double v : s.intensities)
    if (!std::isfinite(v))
      throw std::invalid_argument("modpoly_baseline: non-finite intensity");

  // Rescale the axis to [-1, 1].
  const double lo = s.wavelengths_nm.front();
  const double hi = s.wavelengths_nm.back();
  const double mid = 0.5 * (lo + hi);
  const double half = 0.5 * (hi - lo);
  std::vector<double> t(s.size());
  for (std::size_t i = 0; i < s.size(); ++i)
    t[i] = (s.wavelengths_nm[i] - mid) / half;

  std::vector<double> work = s.intensities;
  std::vector<double> fit;
  std::vector<double> prev_fit;
  for (int iter = 0; iter < cfg.max_iterations; ++iter) {
    fit = polyfit_eval(t, work, cfg.order);

    if (iter > 0) {
      double max_delta = 0.0;
      double max_fit = 0.0;
      for (std::size_t i = 0; i < fit.size(); ++i) {
        max_delta = std::max(max_delta, std::fabs(fit[i] - prev_fit[i]));
        max_fit = std::max(max_fit, std::fabs(fit[i]));
      }
      if (max_delta / (max_fit + 1e-12) < cfg.tolerance) break;
    }
    prev_fit = fit;

    for (std::size_t i = 0; i < work.size(); ++i)
      work[i] = std::min(work[i], fit[i]);
  }

  return Spectrum{s.wavelengths_nm, std::move(fit)};
}

Spectrum correct_baseline(const Spectrum& s, const Spectrum& baseline) {
  validate(s);
  validate(baseline);
  if (s.wavelengths_nm != baseline.wavelengths_nm)
    throw std::invalid_argument("correct_baseline: axis mismatch");

  Spectrum out;
  out.wavelengths_nm = s.wavelengths_nm;
  out.intensities.resize(s.size());
  for (std::size_t i = 0; i < s.size(); ++i)
    out.intensities[i] = std::max(0.0, s.intensities[i] - baseline.intensities[i]);
  return out;
}

NormalizeResult minmax_normalize(const Spectrum& s) {
  validate(s);
  const auto [mn_it, mx_it] =
      std::minmax_element(s.intensities.begin(), s.intensities.end());
  const double mn = *mn_it;
  const double mx = *mx_it;

  NormalizeResult res;
  res.spectrum.wavelengths_nm = s.wavelengths_nm;
  res.spectrum.intensities.resize(s.size());

  const double span = mx - mn;
  const double flat_eps = 1e-12 * std::max({1.0, std::fabs(mx), std::fabs(mn)});
  if (span <= flat_eps) {
    res.flat = true;
    return res;  // intensities already zero-filled
  }
  for (std::size_t i = 0; i < s.size(); ++i)
    res.spectrum.intensities[i] = (s.intensities[i] - mn) / span;
  return res;
}

FeatureVector resample_linear(const Spectrum& s, int n) {
  validate(s);
  if (n < 2) throw std::invalid_argument("resample_linear: n must be >= 2");

  const double first = s.wavelengths_nm.front();
  const double last = s.wavelengths_nm.back();
  const double step = (last - first) / (n - 1);

  FeatureVector out;
  out.values.resize(n);
  std::size_t seg = 0;  // target wavelengths are monotone, sweep the axis once
  for (int i = 0; i < n; ++i) {
    if (i == 0) {
      out.values[0] = s.intensities.front();
      continue;
    }
    if (i == n - 1) {
      out.values[n - 1] = s.intensities.back();
      continue;
    }
    const double lambda = first + i * step;
    while (seg + 2 < s.size() && s.wavelengths_nm[seg + 1] < lambda) ++seg;
    const double x0 = s.wavelengths_nm[seg];
    const double x1 = s.wavelengths_nm[seg + 1];
    const double y0 = s.intensities[seg];
    const double y1 = s.intensities[seg + 1];
    const double u = (lambda - x0) / (x1 - x0);
    out.values[i] = y0 + u * (y1 - y0);
  }
  return out;
}

PreprocessResult preprocess(const Spectrum& raw, const SpectralWindow& w,
                            const BaselineConfig& cfg, int n_features) {
  const Spectrum cropped = crop_window(raw, w);
  const Spectrum baseline = modpoly_baseline(cropped, cfg);
  const Spectrum corrected = correct_baseline(cropped, baseline);
  const NormalizeResult norm = minmax_normalize(corrected);

  PreprocessResult res;
  res.flat = norm.flat;
  res.features = resample_linear(norm.spectrum, n_features);
  // Interpolation of values in [0, 1] can exceed the bounds by an ulp.
  for (double& v : res.features.values) v = std::clamp(v, 0.0, 1.0);
  return res;
}

double wavelength_to_raman_shift(double lambda_nm, double excitation_nm) {
  if (!(lambda_nm > 0.0) || !(excitation_nm > 0.0))
    throw std::invalid_argument("wavelength_to_raman_shift: inputs must be > 0");
  return 1e7 * (1.0 / excitation_nm - 1.0 / lambda_nm);
}

}  // namespace sers
