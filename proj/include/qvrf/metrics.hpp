// Copyright 2026 The qvrf Authors. All Rights Reserved.
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

#ifndef QVRF_METRICS_HPP_
#define QVRF_METRICS_HPP_

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <vector>

#include "qvrf/error.hpp"
#include "qvrf/image.hpp"

namespace qvrf {

// Reported instead of +inf when the images are identical.
inline constexpr double kPsnrCapDb = 99.0;

inline void check_same_size(const Image& x, const Image& y) {
  if (x.width != y.width || x.height != y.height ||
      x.samples.size() != y.samples.size()) {
    throw ConfigError("metrics: image dimensions differ");
  }
}

inline double mse(const Image& x, const Image& y) {
  check_same_size(x, y);
  std::uint64_t sse = 0;
  for (std::size_t i = 0; i < x.samples.size(); ++i) {
    const int d = int(x.samples[i]) - int(y.samples[i]);
    sse += std::uint64_t(d * d);
  }
  return double(sse) / double(x.samples.size());
}

inline double psnr(const Image& x, const Image& y) {
  const double m = mse(x, y);
  if (m == 0.0) return kPsnrCapDb;
  return 10.0 * std::log10(255.0 * 255.0 / m);
}

namespace detail {

struct Plane {
  int w = 0;
  int h = 0;
  std::vector<double> v;
  double at(int x, int y) const { return v[std::size_t(y) * std::size_t(w) + std::size_t(x)]; }
};

inline Plane to_plane(const Image& img) {
  Plane p{img.width, img.height, std::vector<double>(img.samples.begin(), img.samples.end())};
  return p;
}

inline constexpr int kSsimWindow = 11;
inline constexpr double kSsimSigma = 1.5;

inline std::array<double, kSsimWindow> gaussian_taps() {
  std::array<double, kSsimWindow> t{};
  double sum = 0.0;
  for (int i = 0; i < kSsimWindow; ++i) {
    const double d = i - kSsimWindow / 2;
    t[std::size_t(i)] = std::exp(-d * d / (2.0 * kSsimSigma * kSsimSigma));
    sum += t[std::size_t(i)];
  }
  for (auto& v : t) v /= sum;
  return t;
}

// Separable Gaussian filter, valid region only.
inline Plane filter_valid(const Plane& in) {
  static const auto taps = gaussian_taps();
  const int ow = in.w - kSsimWindow + 1;
  const int oh = in.h - kSsimWindow + 1;
  Plane rows{ow, in.h, std::vector<double>(std::size_t(ow) * std::size_t(in.h))};
  for (int y = 0; y < in.h; ++y) {
    for (int x = 0; x < ow; ++x) {
      double s = 0.0;
      for (int k = 0; k < kSsimWindow; ++k) s += taps[std::size_t(k)] * in.at(x + k, y);
      rows.v[std::size_t(y) * std::size_t(ow) + std::size_t(x)] = s;
    }
  }
  Plane out{ow, oh, std::vector<double>(std::size_t(ow) * std::size_t(oh))};
  for (int y = 0; y < oh; ++y) {
    for (int x = 0; x < ow; ++x) {
      double s = 0.0;
      for (int k = 0; k < kSsimWindow; ++k) s += taps[std::size_t(k)] * rows.at(x, y + k);
      out.v[std::size_t(y) * std::size_t(ow) + std::size_t(x)] = s;
    }
  }
  return out;
}

inline Plane product(const Plane& a, const Plane& b) {
  Plane p{a.w, a.h, std::vector<double>(a.v.size())};
  for (std::size_t i = 0; i < a.v.size(); ++i) p.v[i] = a.v[i] * b.v[i];
  return p;
}

// 2x2 box average, odd trailing row/column dropped.
inline Plane downsample(const Plane& in) {
  Plane out{in.w / 2, in.h / 2, {}};
  out.v.resize(std::size_t(out.w) * std::size_t(out.h));
  for (int y = 0; y < out.h; ++y) {
    for (int x = 0; x < out.w; ++x) {
      out.v[std::size_t(y) * std::size_t(out.w) + std::size_t(x)] =
          0.25 * (in.at(2 * x, 2 * y) + in.at(2 * x + 1, 2 * y) +
                  in.at(2 * x, 2 * y + 1) + in.at(2 * x + 1, 2 * y + 1));
    }
  }
  return out;
}

struct SsimTerms {
  double luminance_cs = 0.0;  // mean of l*cs
  double cs = 0.0;            // mean of cs
};

inline SsimTerms ssim_terms(const Plane& x, const Plane& y) {
  constexpr double c1 = (0.01 * 255.0) * (0.01 * 255.0);
  constexpr double c2 = (0.03 * 255.0) * (0.03 * 255.0);
  const Plane mx = filter_valid(x);
  const Plane my = filter_valid(y);
  const Plane exx = filter_valid(product(x, x));
  const Plane eyy = filter_valid(product(y, y));
  const Plane exy = filter_valid(product(x, y));
  double sum_ssim = 0.0;
  double sum_cs = 0.0;
  for (std::size_t i = 0; i < mx.v.size(); ++i) {
    const double mxy = mx.v[i] * my.v[i];
    const double vx = exx.v[i] - mx.v[i] * mx.v[i];
    const double vy = eyy.v[i] - my.v[i] * my.v[i];
    const double cov = exy.v[i] - mxy;
    const double l = (2.0 * mxy + c1) / (mx.v[i] * mx.v[i] + my.v[i] * my.v[i] + c1);
    const double cs = (2.0 * cov + c2) / (vx + vy + c2);
    sum_ssim += l * cs;
    sum_cs += cs;
  }
  const double n = double(mx.v.size());
  return {sum_ssim / n, sum_cs / n};
}

}  // namespace detail

inline constexpr int kMsSsimScales = 5;
inline constexpr std::array<double, kMsSsimScales> kMsSsimWeights = {
    0.0448, 0.2856, 0.3001, 0.2363, 0.1333};
// 11-tap window at the coarsest of 5 dyadic scales.
inline constexpr int kMsSsimMinDimension = 176;

// Five-scale MS-SSIM on 8-bit luma. Negative per-scale terms are clamped to
// zero before exponentiation.
inline double ms_ssim(const Image& x, const Image& y) {
  check_same_size(x, y);
  if (std::min(x.width, x.height) < kMsSsimMinDimension) {
    throw ConfigError("ms_ssim: image smaller than " +
                      std::to_string(kMsSsimMinDimension) + " pixels");
  }
  detail::Plane px = detail::to_plane(x);
  detail::Plane py = detail::to_plane(y);
  double result = 1.0;
  for (int s = 0; s < kMsSsimScales; ++s) {
    const auto terms = detail::ssim_terms(px, py);
    const double term = s == kMsSsimScales - 1 ? terms.luminance_cs : terms.cs;
    result *= std::pow(std::max(term, 0.0), kMsSsimWeights[std::size_t(s)]);
    if (s + 1 < kMsSsimScales) {
      px = detail::downsample(px);
      py = detail::downsample(py);
    }
  }
  return result;
}

}  // namespace qvrf

#endif  // QVRF_METRICS_HPP_
