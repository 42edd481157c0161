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

#ifndef QVRF_TRANSFORM_HPP_
#define QVRF_TRANSFORM_HPP_

// Blockwise orthonormal DCT-II analysis/synthesis and the per-band scale
// side channel.
//
// Coefficients are regrouped into B*B band planes (band = u*B + v for
// vertical frequency u, horizontal frequency v) and expressed in latent units:
// DCT output divided by latent_step. The DC plane holds left-neighbour DPCM
// residuals; the first column predicts from above and the origin from the
// mid-gray DC value.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <vector>

#include "qvrf/entropy_model.hpp"
#include "qvrf/error.hpp"
#include "qvrf/image.hpp"
#include "qvrf/range_coder.hpp"

namespace qvrf {

// Pixel-domain size of one latent unit. With this choice a = 1 is a coarse
// operating point and a = 10 a high-quality one.
inline constexpr double kDefaultLatentStep = 64.0;

struct TransformConfig {
  int block_size = 8;
  double latent_step = kDefaultLatentStep;
};

struct LatentTensor {
  int block_size = 0;
  int blocks_x = 0;
  int blocks_y = 0;
  // Size of the source image before edge padding.
  int width = 0;
  int height = 0;
  double latent_step = kDefaultLatentStep;
  std::vector<std::vector<double>> planes;

  int band_count() const { return block_size * block_size; }
  std::size_t plane_size() const {
    return std::size_t(blocks_x) * std::size_t(blocks_y);
  }
  int padded_width() const { return blocks_x * block_size; }
  int padded_height() const { return blocks_y * block_size; }
  int pad_x() const { return padded_width() - width; }
  int pad_y() const { return padded_height() - height; }

  double& at(int band, int bx, int by) {
    return planes[std::size_t(band)][std::size_t(by) * std::size_t(blocks_x) + std::size_t(bx)];
  }
  double at(int band, int bx, int by) const {
    return planes[std::size_t(band)][std::size_t(by) * std::size_t(blocks_x) + std::size_t(bx)];
  }
};

struct BandScales {
  std::vector<double> sigma;
};

struct SideInfo {
  std::vector<std::uint8_t> index;
  friend bool operator==(const SideInfo&, const SideInfo&) = default;
};

inline constexpr double kScaleLogStep = 0.25;
inline constexpr int kScaleCodebookSize = 64;
inline constexpr int kScaleIndexBits = 6;  // ceil(log2(kScaleCodebookSize))

namespace detail {

inline void check_block_size(int b) {
  if (b != 4 && b != 8 && b != 16) {
    throw ConfigError("transform: block size must be 4, 8 or 16");
  }
}

// Row u holds basis function u sampled at x = 0..B-1.
inline std::vector<double> dct_matrix(int b) {
  std::vector<double> m(std::size_t(b) * std::size_t(b));
  for (int u = 0; u < b; ++u) {
    const double c = u == 0 ? std::sqrt(1.0 / b) : std::sqrt(2.0 / b);
    for (int x = 0; x < b; ++x) {
      m[std::size_t(u * b + x)] =
          c * std::cos((2 * x + 1) * u * std::numbers::pi / (2.0 * b));
    }
  }
  return m;
}

inline double mid_gray_dc(int block_size, double latent_step) {
  return 128.0 * block_size / latent_step;
}

}  // namespace detail

// DPCM prediction for DC position (bx, by) from already known DC values.
inline double dc_prediction(const std::vector<double>& dc, int bx, int by,
                            int blocks_x, double origin) {
  if (bx > 0) return dc[std::size_t(by) * std::size_t(blocks_x) + std::size_t(bx - 1)];
  if (by > 0) return dc[std::size_t(by - 1) * std::size_t(blocks_x)];
  return origin;
}

inline double dc_origin(const LatentTensor& lat) {
  return detail::mid_gray_dc(lat.block_size, lat.latent_step);
}

// Band-plane DCT coefficients (no DPCM) of the edge-padded image.
inline LatentTensor forward_bands(const Image& img, const TransformConfig& cfg = {}) {
  detail::check_block_size(cfg.block_size);
  if (img.width <= 0 || img.height <= 0 || img.samples.empty()) {
    throw ConfigError("transform: zero-size image");
  }
  if (!(cfg.latent_step > 0.0)) throw ConfigError("transform: bad latent step");
  const int b = cfg.block_size;
  LatentTensor lat;
  lat.block_size = b;
  lat.blocks_x = (img.width + b - 1) / b;
  lat.blocks_y = (img.height + b - 1) / b;
  lat.width = img.width;
  lat.height = img.height;
  lat.latent_step = cfg.latent_step;
  lat.planes.assign(std::size_t(b * b), std::vector<double>(lat.plane_size()));

  const auto c = detail::dct_matrix(b);
  const double inv_step = 1.0 / cfg.latent_step;
  std::vector<double> block(std::size_t(b * b)), tmp(std::size_t(b * b));
  for (int by = 0; by < lat.blocks_y; ++by) {
    for (int bx = 0; bx < lat.blocks_x; ++bx) {
      for (int y = 0; y < b; ++y) {
        const int sy = std::min(by * b + y, img.height - 1);
        for (int x = 0; x < b; ++x) {
          const int sx = std::min(bx * b + x, img.width - 1);
          block[std::size_t(y * b + x)] = img.at(sx, sy);
        }
      }
      // tmp = C * X, coefficients = tmp * C^T
      for (int u = 0; u < b; ++u) {
        for (int x = 0; x < b; ++x) {
          double s = 0.0;
          for (int y = 0; y < b; ++y) s += c[std::size_t(u * b + y)] * block[std::size_t(y * b + x)];
          tmp[std::size_t(u * b + x)] = s;
        }
      }
      for (int u = 0; u < b; ++u) {
        for (int v = 0; v < b; ++v) {
          double s = 0.0;
          for (int x = 0; x < b; ++x) s += tmp[std::size_t(u * b + x)] * c[std::size_t(v * b + x)];
          lat.at(u * b + v, bx, by) = s * inv_step;
        }
      }
    }
  }
  return lat;
}

// Real-valued padded pixels from band planes (no DPCM), row-major
// padded_width() x padded_height().
inline std::vector<double> synthesize_bands(const LatentTensor& lat) {
  detail::check_block_size(lat.block_size);
  if (lat.planes.size() != std::size_t(lat.band_count())) {
    throw ConfigError("transform: band count mismatch");
  }
  for (const auto& p : lat.planes) {
    if (p.size() != lat.plane_size()) throw ConfigError("transform: plane shape mismatch");
  }
  const int b = lat.block_size;
  const int pw = lat.padded_width();
  const auto c = detail::dct_matrix(b);
  std::vector<double> out(std::size_t(pw) * std::size_t(lat.padded_height()));
  std::vector<double> coef(std::size_t(b * b)), tmp(std::size_t(b * b));
  for (int by = 0; by < lat.blocks_y; ++by) {
    for (int bx = 0; bx < lat.blocks_x; ++bx) {
      for (int band = 0; band < b * b; ++band) {
        coef[std::size_t(band)] = lat.at(band, bx, by) * lat.latent_step;
      }
      // tmp = C^T * Y, block = tmp * C
      for (int y = 0; y < b; ++y) {
        for (int v = 0; v < b; ++v) {
          double s = 0.0;
          for (int u = 0; u < b; ++u) s += c[std::size_t(u * b + y)] * coef[std::size_t(u * b + v)];
          tmp[std::size_t(y * b + v)] = s;
        }
      }
      for (int y = 0; y < b; ++y) {
        for (int x = 0; x < b; ++x) {
          double s = 0.0;
          for (int v = 0; v < b; ++v) s += tmp[std::size_t(y * b + v)] * c[std::size_t(v * b + x)];
          out[std::size_t(by * b + y) * std::size_t(pw) + std::size_t(bx * b + x)] = s;
        }
      }
    }
  }
  return out;
}

// Replaces the DC plane with open-loop DPCM residuals.
inline void dpcm_forward(LatentTensor& lat) {
  const auto dc = lat.planes[0];
  const double origin = dc_origin(lat);
  for (int by = 0; by < lat.blocks_y; ++by) {
    for (int bx = 0; bx < lat.blocks_x; ++bx) {
      lat.at(0, bx, by) = dc[std::size_t(by) * std::size_t(lat.blocks_x) + std::size_t(bx)] -
                          dc_prediction(dc, bx, by, lat.blocks_x, origin);
    }
  }
}

// Turns DC residuals back into DC values.
inline void dpcm_inverse(LatentTensor& lat) {
  auto& dc = lat.planes[0];
  const double origin = dc_origin(lat);
  for (int by = 0; by < lat.blocks_y; ++by) {
    for (int bx = 0; bx < lat.blocks_x; ++bx) {
      dc[std::size_t(by) * std::size_t(lat.blocks_x) + std::size_t(bx)] +=
          dc_prediction(dc, bx, by, lat.blocks_x, origin);
    }
  }
}

inline LatentTensor forward(const Image& img, const TransformConfig& cfg = {}) {
  LatentTensor lat = forward_bands(img, cfg);
  dpcm_forward(lat);
  return lat;
}

// Padded real-valued reconstruction before rounding and clipping.
inline std::vector<double> inverse_unclipped(LatentTensor lat) {
  if (lat.planes.empty()) throw ConfigError("transform: empty latent");
  if (lat.planes[0].size() != lat.plane_size()) {
    throw ConfigError("transform: plane shape mismatch");
  }
  dpcm_inverse(lat);
  return synthesize_bands(lat);
}

inline Image inverse(const LatentTensor& lat) {
  if (lat.width <= 0 || lat.height <= 0 || lat.width > lat.padded_width() ||
      lat.height > lat.padded_height() || lat.pad_x() >= lat.block_size ||
      lat.pad_y() >= lat.block_size) {
    throw ConfigError("transform: inconsistent latent dimensions");
  }
  const auto real = inverse_unclipped(lat);
  const int pw = lat.padded_width();
  Image img(lat.width, lat.height);
  for (int y = 0; y < lat.height; ++y) {
    for (int x = 0; x < lat.width; ++x) {
      const double v = std::round(real[std::size_t(y) * std::size_t(pw) + std::size_t(x)]);
      img.at(x, y) = static_cast<std::uint8_t>(std::clamp(v, 0.0, 255.0));
    }
  }
  return img;
}

// Per-band scale: root mean square about the model mean of zero, floored at
// kSigmaMin. Never depends on the regulator.
inline BandScales estimate_scales(const LatentTensor& lat) {
  BandScales s;
  s.sigma.reserve(lat.planes.size());
  for (const auto& plane : lat.planes) {
    if (plane.empty()) throw ConfigError("estimate_scales: empty plane");
    double sum_sq = 0.0;
    for (const double v : plane) sum_sq += v * v;
    s.sigma.push_back(std::max(kSigmaMin, std::sqrt(sum_sq / double(plane.size()))));
  }
  return s;
}

inline SideInfo quantize_scales(const BandScales& s) {
  SideInfo si;
  si.index.reserve(s.sigma.size());
  for (const double sigma : s.sigma) {
    const double idx =
        std::round(std::log(std::max(sigma, kSigmaMin) / kSigmaMin) / kScaleLogStep);
    si.index.push_back(static_cast<std::uint8_t>(
        std::clamp(idx, 0.0, double(kScaleCodebookSize - 1))));
  }
  return si;
}

inline BandScales dequantize_scales(const SideInfo& si) {
  BandScales s;
  s.sigma.reserve(si.index.size());
  for (const auto idx : si.index) {
    if (idx >= kScaleCodebookSize) throw FormatError("side info: scale index out of range");
    s.sigma.push_back(kSigmaMin * std::exp(kScaleLogStep * idx));
  }
  return s;
}

// Side segment: each index as kScaleIndexBits raw bits, a uniform model over
// the codebook, so its size depends only on the band count.
inline std::vector<std::uint8_t> encode_side_info(const SideInfo& si) {
  RangeEncoder enc;
  for (const auto idx : si.index) enc.encode_raw_bits(idx, kScaleIndexBits);
  return enc.finish();
}

inline SideInfo decode_side_info(std::span<const std::uint8_t> bytes, int band_count) {
  RangeDecoder dec(bytes);
  SideInfo si;
  si.index.reserve(std::size_t(band_count));
  for (int b = 0; b < band_count; ++b) {
    const auto idx = dec.decode_raw_bits(kScaleIndexBits);
    if (idx >= std::uint32_t(kScaleCodebookSize)) {
      throw FormatError("side info: scale index out of range");
    }
    si.index.push_back(static_cast<std::uint8_t>(idx));
  }
  return si;
}

}  // namespace qvrf

#endif  // QVRF_TRANSFORM_HPP_
