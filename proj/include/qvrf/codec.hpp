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

#ifndef QVRF_CODEC_HPP_
#define QVRF_CODEC_HPP_

// End-to-end encode/decode and the .qvrf container.
//
// Container layout (big-endian, fixed 24-byte header):
//
//   offset  size  field
//        0     4  magic "QVRF"
//        4     1  version (1)
//        5     1  block size B
//        6     1  horizontal edge padding
//        7     1  vertical edge padding
//        8     4  width
//       12     4  height
//       16     4  regulator a, IEEE-754 binary32 bit pattern
//       20     4  side segment length in bytes
//       24     -  side segment, then latent segment to end of file
//
// Latent symbols are coded band-major, raster order within each band. The DC
// band is quantized closed-loop: each residual is taken against the
// reconstructed left (or upper) neighbour, so latent and pixel errors agree.

#include <array>
#include <bit>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "qvrf/entropy_model.hpp"
#include "qvrf/error.hpp"
#include "qvrf/image.hpp"
#include "qvrf/range_coder.hpp"
#include "qvrf/transform.hpp"

namespace qvrf {

inline constexpr std::array<std::uint8_t, 4> kMagic = {'Q', 'V', 'R', 'F'};
inline constexpr std::uint8_t kFormatVersion = 1;
inline constexpr std::size_t kHeaderBytes = 24;
inline constexpr int kMaxImageDimension = 1 << 16;

struct Header {
  int width = 0;
  int height = 0;
  int block_size = 8;
  int pad_x = 0;
  int pad_y = 0;
  std::uint32_t a_bits = 0;
  std::uint32_t side_length = 0;

  double a() const { return double(std::bit_cast<float>(a_bits)); }

  friend bool operator==(const Header&, const Header&) = default;
};

struct Bitstream {
  Header header;
  std::vector<std::uint8_t> side;
  std::vector<std::uint8_t> latent;

  std::size_t size_bytes() const { return kHeaderBytes + side.size() + latent.size(); }

  std::vector<std::uint8_t> serialize() const {
    std::vector<std::uint8_t> out;
    out.reserve(size_bytes());
    for (const auto c : kMagic) out.push_back(c);
    out.push_back(kFormatVersion);
    out.push_back(std::uint8_t(header.block_size));
    out.push_back(std::uint8_t(header.pad_x));
    out.push_back(std::uint8_t(header.pad_y));
    auto put32 = [&out](std::uint32_t v) {
      for (int s = 24; s >= 0; s -= 8) out.push_back(std::uint8_t(v >> s));
    };
    put32(std::uint32_t(header.width));
    put32(std::uint32_t(header.height));
    put32(header.a_bits);
    put32(std::uint32_t(side.size()));
    out.insert(out.end(), side.begin(), side.end());
    out.insert(out.end(), latent.begin(), latent.end());
    return out;
  }

  // Validates everything that can be checked without entropy decoding.
  static Bitstream parse(std::span<const std::uint8_t> bytes,
                         RegulatorBounds bounds = {}) {
    if (bytes.size() < kHeaderBytes) throw StreamExhausted("bitstream: truncated header");
    if (!std::equal(kMagic.begin(), kMagic.end(), bytes.begin())) {
      throw FormatError("bitstream: bad magic");
    }
    if (bytes[4] != kFormatVersion) {
      throw FormatError("bitstream: unsupported version " + std::to_string(bytes[4]));
    }
    auto get32 = [&bytes](std::size_t off) {
      return (std::uint32_t(bytes[off]) << 24) | (std::uint32_t(bytes[off + 1]) << 16) |
             (std::uint32_t(bytes[off + 2]) << 8) | std::uint32_t(bytes[off + 3]);
    };
    Bitstream bs;
    Header& h = bs.header;
    h.block_size = bytes[5];
    h.pad_x = bytes[6];
    h.pad_y = bytes[7];
    const std::uint32_t w = get32(8);
    const std::uint32_t ht = get32(12);
    h.a_bits = get32(16);
    h.side_length = get32(20);
    if (h.block_size != 4 && h.block_size != 8 && h.block_size != 16) {
      throw FormatError("bitstream: bad block size");
    }
    if (w == 0 || ht == 0 || w > std::uint32_t(kMaxImageDimension) ||
        ht > std::uint32_t(kMaxImageDimension)) {
      throw FormatError("bitstream: bad dimensions");
    }
    h.width = int(w);
    h.height = int(ht);
    const int b = h.block_size;
    if (h.pad_x != (b - h.width % b) % b || h.pad_y != (b - h.height % b) % b) {
      throw FormatError("bitstream: padding inconsistent with dimensions");
    }
    const double a = h.a();
    if (!std::isfinite(a) || a < bounds.min || a > bounds.max) {
      throw FormatError("bitstream: regulator out of bounds");
    }
    if (h.side_length > bytes.size() - kHeaderBytes) {
      throw StreamExhausted("bitstream: truncated side segment");
    }
    const auto side_begin = bytes.begin() + std::ptrdiff_t(kHeaderBytes);
    const auto latent_begin = side_begin + std::ptrdiff_t(h.side_length);
    bs.side.assign(side_begin, latent_begin);
    bs.latent.assign(latent_begin, bytes.end());
    return bs;
  }
};

// Everything about an image that does not depend on a: band coefficients,
// side information and its coded bytes.
struct PreparedImage {
  LatentTensor bands;  // DCT band planes, DC not yet predicted
  SideInfo side;
  BandScales scales;  // dequantized, as the decoder sees them
  std::vector<std::uint8_t> side_bytes;
  Image source;
};

inline PreparedImage prepare_image(const Image& img, const TransformConfig& cfg = {}) {
  if (img.width > kMaxImageDimension || img.height > kMaxImageDimension) {
    throw ConfigError("encode: image too large");
  }
  if (cfg.latent_step != kDefaultLatentStep) {
    throw ConfigError("encode: latent step is fixed by the container format");
  }
  PreparedImage p;
  p.bands = forward_bands(img, cfg);
  LatentTensor predicted = p.bands;
  dpcm_forward(predicted);
  p.side = quantize_scales(estimate_scales(predicted));
  p.scales = dequantize_scales(p.side);
  p.side_bytes = encode_side_info(p.side);
  p.source = img;
  return p;
}

struct QuantizedLatent {
  std::vector<std::vector<Symbol>> symbols;  // per band
  LatentTensor dequantized;                  // DC plane holds residuals
  double max_abs_error = 0.0;                // over coded latent values
  double squared_error = 0.0;                // sum over coded latent values
};

inline QuantizedLatent quantize_latent(const LatentTensor& bands, const Regulator& a) {
  QuantizedLatent q;
  q.dequantized = bands;
  q.symbols.assign(bands.planes.size(), std::vector<Symbol>(bands.plane_size()));
  auto track = [&q](double y, double y_hat) {
    const double e = y - y_hat;
    q.max_abs_error = std::max(q.max_abs_error, std::fabs(e));
    q.squared_error += e * e;
  };

  // Closed-loop DPCM on DC.
  const auto& dc = bands.planes[0];
  std::vector<double> recon(dc.size());
  const double origin = dc_origin(bands);
  for (int by = 0; by < bands.blocks_y; ++by) {
    for (int bx = 0; bx < bands.blocks_x; ++bx) {
      const std::size_t i = std::size_t(by) * std::size_t(bands.blocks_x) + std::size_t(bx);
      const double pred = dc_prediction(recon, bx, by, bands.blocks_x, origin);
      const double residual = dc[i] - pred;
      const Symbol k = quantize(residual, a);
      const double r_hat = dequantize(k, a);
      q.symbols[0][i] = k;
      q.dequantized.planes[0][i] = r_hat;
      recon[i] = r_hat + pred;
      track(residual, r_hat);
    }
  }
  for (std::size_t band = 1; band < bands.planes.size(); ++band) {
    for (std::size_t i = 0; i < bands.plane_size(); ++i) {
      const double y = bands.planes[band][i];
      const Symbol k = quantize(y, a);
      q.symbols[band][i] = k;
      q.dequantized.planes[band][i] = dequantize(k, a);
      track(y, q.dequantized.planes[band][i]);
    }
  }
  return q;
}

inline std::vector<SymbolDistribution> band_tables(const BandScales& scales,
                                                   const Regulator& a) {
  std::vector<SymbolDistribution> tables;
  tables.reserve(scales.sigma.size());
  // Widest scale whose tail window still fits kMaxWindow slots; anything
  // beyond it travels through the escape path.
  const double cap = (kMaxWindow - 3) / (2.0 * kTailFactor * a.value());
  for (const double sigma : scales.sigma) {
    tables.push_back(build_symbol_table(GaussianParams(0.0, std::min(sigma, cap)), a));
  }
  return tables;
}

struct EncodeResult {
  Bitstream stream;
  Image reconstruction;
  QuantizedLatent latent;
  double latent_ideal_bits = 0.0;  // sum of -log2(table mass) plus escape bits
};

// The regulator is rounded to binary32 first; that value is what the header
// carries and what both sides code with.
inline Regulator header_regulator(const Regulator& a, RegulatorBounds bounds = {}) {
  return Regulator(double(static_cast<float>(a.value())), bounds);
}

inline EncodeResult encode_prepared(const PreparedImage& prep, const Regulator& requested,
                                    RegulatorBounds bounds = {}) {
  const Regulator a = header_regulator(requested, bounds);
  EncodeResult r;
  r.latent = quantize_latent(prep.bands, a);

  const auto tables = band_tables(prep.scales, a);
  RangeEncoder enc;
  for (std::size_t band = 0; band < tables.size(); ++band) {
    for (const Symbol k : r.latent.symbols[band]) encode_value(enc, tables[band], k);
  }
  r.latent_ideal_bits = enc.ideal_bits();

  const LatentTensor& lat = prep.bands;
  Header& h = r.stream.header;
  h.width = lat.width;
  h.height = lat.height;
  h.block_size = lat.block_size;
  h.pad_x = lat.pad_x();
  h.pad_y = lat.pad_y();
  h.a_bits = std::bit_cast<std::uint32_t>(static_cast<float>(a.value()));
  h.side_length = std::uint32_t(prep.side_bytes.size());
  r.stream.side = prep.side_bytes;
  r.stream.latent = enc.finish();
  r.reconstruction = inverse(r.latent.dequantized);
  return r;
}

inline EncodeResult encode_image_detailed(const Image& img, const Regulator& a,
                                          const TransformConfig& cfg = {}) {
  return encode_prepared(prepare_image(img, cfg), a);
}

inline Bitstream encode_image(const Image& img, const Regulator& a,
                              const TransformConfig& cfg = {}) {
  return encode_image_detailed(img, a, cfg).stream;
}

// Rebuilds the dequantized latent (DC plane as residuals) from a container.
inline LatentTensor decode_latent(const Bitstream& bs, RegulatorBounds bounds = {}) {
  const Header& h = bs.header;
  if (h.side_length != bs.side.size()) throw FormatError("bitstream: side length mismatch");
  const Regulator a(h.a(), bounds);
  const int b = h.block_size;

  LatentTensor lat;
  lat.block_size = b;
  lat.blocks_x = (h.width + h.pad_x) / b;
  lat.blocks_y = (h.height + h.pad_y) / b;
  lat.width = h.width;
  lat.height = h.height;
  lat.latent_step = kDefaultLatentStep;
  lat.planes.assign(std::size_t(b * b), std::vector<double>(lat.plane_size()));

  const SideInfo side = decode_side_info(bs.side, b * b);
  const auto tables = band_tables(dequantize_scales(side), a);
  RangeDecoder dec(bs.latent);
  for (std::size_t band = 0; band < tables.size(); ++band) {
    for (auto& v : lat.planes[band]) v = dequantize(decode_value(dec, tables[band]), a);
  }
  return lat;
}

inline Image decode_image(const Bitstream& bs, RegulatorBounds bounds = {}) {
  return inverse(decode_latent(bs, bounds));
}

inline Image decode_image(std::span<const std::uint8_t> bytes, RegulatorBounds bounds = {}) {
  return decode_image(Bitstream::parse(bytes, bounds), bounds);
}

struct BitBreakdown {
  double total_bpp = 0.0;
  double latent_bpp = 0.0;
  double side_bpp = 0.0;
  double header_bpp = 0.0;
};

inline BitBreakdown account_bits(const Bitstream& bs) {
  const double pixels = double(bs.header.width) * double(bs.header.height);
  BitBreakdown b;
  b.total_bpp = 8.0 * double(bs.size_bytes()) / pixels;
  b.latent_bpp = 8.0 * double(bs.latent.size()) / pixels;
  b.side_bpp = 8.0 * double(bs.side.size()) / pixels;
  b.header_bpp = 8.0 * double(kHeaderBytes) / pixels;
  return b;
}

}  // namespace qvrf

#endif  // QVRF_CODEC_HPP_
