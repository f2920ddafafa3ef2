// Copyright 2026 The Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "ionaddr/profiles.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <string>

namespace ionaddr::profiles {

using std::numbers::pi;

void ExposureStack::validate() const {
  if (frames.empty()) throw DomainError("exposure stack is empty");
  const auto& first = frames.front();
  for (std::size_t i = 0; i < frames.size(); ++i) {
    const auto& f = frames[i];
    f.validate();
    if (f.width != first.width || f.height != first.height ||
        f.pixel_pitch != first.pixel_pitch)
      throw DomainError("frames must share one pixel grid");
    if (!(f.saturation_level > 0.0))
      throw DomainError("saturation level must be positive");
    if (i > 0 && !(f.exposure > frames[i - 1].exposure))
      throw DomainError("exposures must be strictly ascending");
  }
}

IntensityProfile hdr_stitch(const ExposureStack& stack) {
  stack.validate();
  IntensityProfile out = stack.frames.front();
  out.exposure = 1.0;
  out.saturation_level = std::numeric_limits<double>::infinity();
  out.source_exposure.assign(out.samples.size(), 0.0);
  std::vector<std::size_t> saturated;
  for (std::size_t p = 0; p < out.samples.size(); ++p) {
    bool found = false;
    for (auto it = stack.frames.rbegin(); it != stack.frames.rend(); ++it) {
      const double v = it->samples[p];
      if (v < kSaturationFraction * it->saturation_level) {
        out.samples[p] = v / it->exposure;
        out.source_exposure[p] = it->exposure;
        found = true;
        break;
      }
    }
    if (!found) saturated.push_back(p);
  }
  if (!saturated.empty()) {
    std::string list;
    for (std::size_t i = 0; i < std::min<std::size_t>(saturated.size(), 10); ++i)
      list += (i ? ", " : "") + std::to_string(saturated[i]);
    if (saturated.size() > 10) list += ", ...";
    throw SaturatedPixelError(std::to_string(saturated.size()) +
                                  " pixel(s) saturated at every exposure: " + list,
                              std::move(saturated));
  }
  return out;
}

void NoiseModel::validate() const {
  if (!(dark_noise >= 0.0 && read_noise >= 0.0))
    throw DomainError("noise amplitudes must be nonnegative");
}

double NoiseModel::sigma_counts(double counts) const {
  double var = dark_noise * dark_noise + read_noise * read_noise;
  if (shot_noise) var += std::max(counts, 0.0);
  return std::sqrt(var);
}

PeakEstimate refine_peak(const IntensityProfile& profile) {
  profile.validate();
  if (!profile.is_1d()) throw DomainError("peak refinement needs a 1D profile");
  PeakEstimate pk;
  pk.index = profile.argmax();
  if (pk.index == 0 || pk.index + 1 >= profile.width)
    throw DomainError("peak lies on the edge of the profile");
  const double y0 = profile.samples[pk.index - 1];
  const double y1 = profile.samples[pk.index];
  const double y2 = profile.samples[pk.index + 1];
  const double curvature = y0 - 2.0 * y1 + y2;
  double delta = 0.0;
  if (curvature < 0.0) delta = 0.5 * (y0 - y2) / curvature;
  pk.position = profile.position(pk.index) + delta * profile.pixel_pitch;
  pk.value = y1 - 0.25 * (y0 - y2) * delta;
  return pk;
}

double beam_radius(const IntensityProfile& profile) {
  const PeakEstimate pk = refine_peak(profile);
  const double level = pk.value * std::exp(-2.0);
  const auto& s = profile.samples;
  auto crossing = [&](long step) -> double {
    long i = static_cast<long>(pk.index);
    while (true) {
      const long j = i + step;
      if (j < 0 || j >= static_cast<long>(s.size()))
        throw DomainError("profile never drops to 1/e^2 of its peak");
      if (s[static_cast<std::size_t>(j)] < level) {
        const double a = s[static_cast<std::size_t>(i)];
        const double b = s[static_cast<std::size_t>(j)];
        const double t = (a - level) / (a - b);
        return profile.position(static_cast<std::size_t>(i)) +
               static_cast<double>(step) * t * profile.pixel_pitch;
      }
      i = j;
    }
  };
  return 0.5 * (crossing(1) - crossing(-1));
}

double noise_floor(const IntensityProfile& profile, IndexRange dark_region) {
  if (dark_region.last <= dark_region.first || dark_region.last > profile.width)
    throw DomainError("dark region is empty or outside the profile");
  const PeakEstimate pk = refine_peak(profile);
  const double w = beam_radius(profile);
  const double lo = profile.position(dark_region.first);
  const double hi = profile.position(dark_region.last - 1);
  const double keep_out = 6.0 * w;
  if (hi >= pk.position - keep_out && lo <= pk.position + keep_out)
    throw DomainError("dark region overlaps the beam (within 6 w of the peak)");

  const auto first = profile.samples.begin() + static_cast<std::ptrdiff_t>(dark_region.first);
  const auto last = profile.samples.begin() + static_cast<std::ptrdiff_t>(dark_region.last);
  const double n = static_cast<double>(dark_region.last - dark_region.first);
  double mean = 0.0;
  for (auto it = first; it != last; ++it) mean += *it;
  mean /= n;
  double var = 0.0;
  for (auto it = first; it != last; ++it) var += (*it - mean) * (*it - mean);
  return std::sqrt(var / n) / pk.value;
}

CrosstalkReport extract_crosstalk(const IntensityProfile& profile, double ion_pitch,
                                  int neighbor_count, const NoiseModel& noise,
                                  std::optional<IndexRange> dark_region) {
  noise.validate();
  if (!(ion_pitch > 0.0)) throw DomainError("ion pitch must be positive");
  if (neighbor_count < 1) throw DomainError("neighbor count must be >= 1");
  const PeakEstimate pk = refine_peak(profile);
  const double reach = neighbor_count * ion_pitch;
  const double x_first = profile.position(0);
  const double x_last = profile.position(profile.width - 1);
  if (pk.position - reach < x_first || pk.position + reach > x_last)
    throw DomainError("profile does not span the requested neighbours");

  CrosstalkReport rep;
  rep.peak_position = pk.position;
  rep.peak_value = pk.value;
  // Noise is specified in counts of the frame a sample came from; refer it
  // back to the profile's unit-exposure scale.
  auto exposure_near = [&](double x) {
    const double u = std::round((x - profile.origin) / profile.pixel_pitch);
    const auto i = static_cast<std::size_t>(
        std::clamp(u, 0.0, static_cast<double>(profile.width - 1)));
    return profile.exposure_at(i);
  };
  auto sigma = [&](double value, double exposure) {
    return noise.sigma_counts(value * exposure) / exposure;
  };
  if (dark_region) {
    rep.noise_floor = noise_floor(profile, *dark_region);
  } else {
    double longest = profile.exposure;
    for (double e : profile.source_exposure) longest = std::max(longest, e);
    rep.noise_floor = sigma(0.0, longest) / pk.value;
  }

  const double sigma_peak = sigma(pk.value, exposure_near(pk.position));
  for (int k = -neighbor_count; k <= neighbor_count; ++k) {
    if (k == 0) continue;
    RatioEstimate r;
    r.offset = k * ion_pitch;
    const double x = pk.position + r.offset;
    const double v = profile.interpolate(x);
    r.ratio = v / pk.value;
    const double sv = sigma(v, exposure_near(x));
    r.uncertainty = std::sqrt(sv * sv + r.ratio * r.ratio * sigma_peak * sigma_peak) / pk.value;
    r.below_noise_floor = r.ratio < rep.noise_floor;
    rep.ratios.push_back(r);
  }
  return rep;
}

namespace {

struct SinusoidFit {
  double offset = 0.0;
  double amplitude = 0.0;
  double rss = std::numeric_limits<double>::infinity();
};

// Least squares a + b cos(2 pi f i) + c sin(2 pi f i) over samples [first, last).
SinusoidFit fit_sinusoid(std::span<const double> y, std::size_t first,
                         std::size_t last, double freq) {
  std::array<double, 9> m{};
  std::array<double, 3> rhs{};
  for (std::size_t i = first; i < last; ++i) {
    const double ph = 2.0 * pi * freq * static_cast<double>(i);
    const std::array<double, 3> basis{1.0, std::cos(ph), std::sin(ph)};
    for (int r = 0; r < 3; ++r) {
      rhs[r] += basis[r] * y[i];
      for (int c = 0; c < 3; ++c) m[3 * r + c] += basis[r] * basis[c];
    }
  }
  // Cramer's rule on the symmetric 3x3 normal equations.
  auto det3 = [](const std::array<double, 9>& a) {
    return a[0] * (a[4] * a[8] - a[5] * a[7]) - a[1] * (a[3] * a[8] - a[5] * a[6]) +
           a[2] * (a[3] * a[7] - a[4] * a[6]);
  };
  const double d = det3(m);
  if (std::abs(d) < 1e-300) return {};
  std::array<double, 3> sol{};
  for (int col = 0; col < 3; ++col) {
    auto mc = m;
    for (int r = 0; r < 3; ++r) mc[3 * r + col] = rhs[r];
    sol[col] = det3(mc) / d;
  }
  double rss = 0.0;
  for (std::size_t i = first; i < last; ++i) {
    const double ph = 2.0 * pi * freq * static_cast<double>(i);
    const double e = y[i] - sol[0] - sol[1] * std::cos(ph) - sol[2] * std::sin(ph);
    rss += e * e;
  }
  return {sol[0], std::hypot(sol[1], sol[2]), rss};
}

}  // namespace

double fringe_contrast(const IntensityProfile& profile) {
  profile.validate();
  const IntensityProfile row = profile.row_through_peak();
  const std::span<const double> y(row.samples);
  const std::size_t n = y.size();
  const auto [lo_it, hi_it] = std::minmax_element(y.begin(), y.end());
  if (*hi_it - *lo_it <= 1e-12 * std::max(std::abs(*hi_it), 1e-300)) return 0.0;
  if (n < 12) throw DomainError("no periodicity detected: too few samples");

  double mean = 0.0;
  for (double v : y) mean += v;
  mean /= static_cast<double>(n);

  // Coarse frequency from the strongest DFT bin, then golden-section search
  // for the least-squares residual minimum around it.
  std::size_t best_bin = 0;
  double best_power = -1.0;
  for (std::size_t k = 1; k <= n / 2; ++k) {
    double re = 0.0, im = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double ph = 2.0 * pi * static_cast<double>(k * i % n) / static_cast<double>(n);
      re += (y[i] - mean) * std::cos(ph);
      im -= (y[i] - mean) * std::sin(ph);
    }
    const double pw = re * re + im * im;
    if (pw > best_power) {
      best_power = pw;
      best_bin = k;
    }
  }
  const double nd = static_cast<double>(n);
  double a = (static_cast<double>(best_bin) - 1.0) / nd;
  double b = (static_cast<double>(best_bin) + 1.0) / nd;
  a = std::max(a, 0.5 / nd);
  b = std::min(b, 0.5);
  auto score = [&](double f) { return -fit_sinusoid(y, 0, n, f).rss; };
  const double g = 0.5 * (std::sqrt(5.0) - 1.0);
  double c = b - g * (b - a), d = a + g * (b - a);
  double fc = score(c), fd = score(d);
  for (int it = 0; it < 100 && b - a > 1e-13 / nd; ++it) {
    if (fc > fd) {
      b = d; d = c; fd = fc;
      c = b - g * (b - a); fc = score(c);
    } else {
      a = c; c = d; fc = fd;
      d = a + g * (b - a); fd = score(d);
    }
  }
  const double freq = 0.5 * (a + b);
  const double cycles = freq * nd;
  if (cycles < 3.0) throw DomainError("no periodicity detected: fewer than 3 fringe periods");

  // Two-period windows; the median is insensitive to a slow envelope and to
  // a partial last window.
  const auto window = std::max<std::size_t>(
      8, static_cast<std::size_t>(std::lround(2.0 / freq)));
  std::vector<double> contrasts;
  for (std::size_t start = 0; start + window <= n; start += window) {
    const SinusoidFit fit = fit_sinusoid(y, start, start + window, freq);
    if (fit.offset > 0.0) contrasts.push_back(fit.amplitude / fit.offset);
  }
  if (contrasts.empty()) {
    const SinusoidFit fit = fit_sinusoid(y, 0, n, freq);
    if (!(fit.offset > 0.0)) throw DomainError("no periodicity detected");
    return fit.amplitude / fit.offset;
  }
  std::sort(contrasts.begin(), contrasts.end());
  const std::size_t m = contrasts.size();
  return m % 2 ? contrasts[m / 2] : 0.5 * (contrasts[m / 2 - 1] + contrasts[m / 2]);
}

IntensityProfile downsample(const IntensityProfile& profile, double pixel_size,
                            double phase) {
  profile.validate();
  if (!profile.is_1d()) throw DomainError("downsample needs a 1D profile");
  if (!(pixel_size > profile.pixel_pitch))
    throw DomainError("camera pixel must be coarser than the source sampling");
  if (!(phase >= 0.0 && phase < 1.0)) throw DomainError("pixel phase must lie in [0, 1)");
  constexpr int kSub = 32;
  const double start = profile.position(0) + phase * pixel_size;
  const double end = profile.position(profile.width - 1);
  const auto count = static_cast<std::size_t>(std::floor((end - start) / pixel_size));
  if (count < 3) throw DomainError("profile too short for this pixel size");
  std::vector<double> values(count);
  for (std::size_t j = 0; j < count; ++j) {
    const double x0 = start + static_cast<double>(j) * pixel_size;
    double acc = 0.0;
    for (int s = 0; s < kSub; ++s)
      acc += profile.interpolate(x0 + (s + 0.5) * pixel_size / kSub);
    values[j] = acc / kSub;
  }
  IntensityProfile out = IntensityProfile::make_1d(std::move(values), pixel_size,
                                                   start + 0.5 * pixel_size);
  out.exposure = profile.exposure;
  out.saturation_level = profile.saturation_level;
  return out;
}

DownsamplingBias downsampling_bias(const IntensityProfile& profile,
                                   double pixel_size, double ion_pitch,
                                   std::size_t phases) {
  if (phases == 0) throw DomainError("need at least one pixel phase");
  const NoiseModel quiet;
  auto worst = [&](const IntensityProfile& p) {
    const CrosstalkReport r = extract_crosstalk(p, ion_pitch, 1, quiet);
    return std::max(r.ratios.front().ratio, r.ratios.back().ratio);
  };
  DownsamplingBias out;
  out.reference_ratio = worst(profile);
  out.min_ratio = std::numeric_limits<double>::infinity();
  out.max_ratio = 0.0;
  for (std::size_t i = 0; i < phases; ++i) {
    const double ph = static_cast<double>(i) / static_cast<double>(phases);
    const double r = worst(downsample(profile, pixel_size, ph));
    out.min_ratio = std::min(out.min_ratio, r);
    out.max_ratio = std::max(out.max_ratio, r);
  }
  return out;
}

ExposureStack render_stack(const IntensityProfile& truth,
                           const RenderSettings& settings, std::uint64_t seed) {
  truth.validate();
  settings.noise.validate();
  if (settings.exposures.empty()) throw DomainError("render needs exposures");
  const double peak = *std::max_element(truth.samples.begin(), truth.samples.end());
  if (!(peak > 0.0)) throw DomainError("truth profile has no signal");
  const double gain = settings.peak_fraction * settings.full_scale / peak;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> unit(0.0, 1.0);
  ExposureStack stack;
  for (double e : settings.exposures) {
    IntensityProfile frame = truth;
    frame.exposure = e;
    frame.saturation_level = settings.full_scale;
    for (double& v : frame.samples) {
      const double mean = v * gain * e;
      double counts = mean + settings.noise.sigma_counts(mean) * unit(rng);
      if (settings.quantize) counts = std::round(counts);
      v = std::clamp(counts, 0.0, settings.full_scale);
    }
    stack.frames.push_back(std::move(frame));
  }
  return stack;
}

}  // namespace ionaddr::profiles
