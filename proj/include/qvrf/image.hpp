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

#ifndef QVRF_IMAGE_HPP_
#define QVRF_IMAGE_HPP_

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

#include "qvrf/error.hpp"

namespace qvrf {

// 8-bit luma image, row-major.
struct Image {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> samples;

  Image() = default;
  Image(int w, int h, std::uint8_t fill = 0)
      : width(w), height(h), samples(std::size_t(w) * std::size_t(h), fill) {
    if (w <= 0 || h <= 0) throw ConfigError("Image: zero or negative size");
  }

  std::size_t pixel_count() const { return samples.size(); }
  std::uint8_t at(int x, int y) const {
    return samples[std::size_t(y) * std::size_t(width) + std::size_t(x)];
  }
  std::uint8_t& at(int x, int y) {
    return samples[std::size_t(y) * std::size_t(width) + std::size_t(x)];
  }

  friend bool operator==(const Image&, const Image&) = default;
};

namespace detail {

inline int read_pnm_int(const std::vector<std::uint8_t>& buf, std::size_t& pos) {
  for (;;) {
    while (pos < buf.size() && std::isspace(buf[pos])) ++pos;
    if (pos < buf.size() && buf[pos] == '#') {
      while (pos < buf.size() && buf[pos] != '\n') ++pos;
      continue;
    }
    break;
  }
  if (pos >= buf.size() || !std::isdigit(buf[pos])) {
    throw FormatError("PNM: malformed header");
  }
  long v = 0;
  while (pos < buf.size() && std::isdigit(buf[pos])) {
    v = v * 10 + (buf[pos++] - '0');
    if (v > (1L << 24)) throw FormatError("PNM: header value too large");
  }
  return int(v);
}

}  // namespace detail

// Parses binary PGM (P5) or PPM (P6) with maxval 255. Color input is reduced
// to BT.601 luma.
inline Image decode_pnm(const std::vector<std::uint8_t>& buf) {
  if (buf.size() < 2 || buf[0] != 'P' || (buf[1] != '5' && buf[1] != '6')) {
    throw FormatError("PNM: only binary P5/P6 supported");
  }
  const bool color = buf[1] == '6';
  std::size_t pos = 2;
  const int w = detail::read_pnm_int(buf, pos);
  const int h = detail::read_pnm_int(buf, pos);
  const int maxval = detail::read_pnm_int(buf, pos);
  if (maxval != 255) throw FormatError("PNM: maxval must be 255");
  if (w <= 0 || h <= 0) throw FormatError("PNM: zero-size image");
  ++pos;  // single whitespace before raster
  const std::size_t channels = color ? 3 : 1;
  const std::size_t need = std::size_t(w) * std::size_t(h) * channels;
  if (buf.size() < pos + need) throw FormatError("PNM: truncated raster");

  Image img(w, h);
  if (!color) {
    std::copy_n(buf.begin() + std::ptrdiff_t(pos), need, img.samples.begin());
    return img;
  }
  for (std::size_t i = 0; i < img.pixel_count(); ++i) {
    const double r = buf[pos + 3 * i];
    const double g = buf[pos + 3 * i + 1];
    const double b = buf[pos + 3 * i + 2];
    const double y = 0.299 * r + 0.587 * g + 0.114 * b;
    img.samples[i] = static_cast<std::uint8_t>(std::lround(std::clamp(y, 0.0, 255.0)));
  }
  return img;
}

inline std::vector<std::uint8_t> encode_pgm(const Image& img) {
  const std::string header = "P5\n" + std::to_string(img.width) + " " +
                             std::to_string(img.height) + "\n255\n";
  std::vector<std::uint8_t> out(header.begin(), header.end());
  out.insert(out.end(), img.samples.begin(), img.samples.end());
  return out;
}

inline std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline void write_file(const std::filesystem::path& path,
                       const std::vector<std::uint8_t>& bytes) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot create " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()),
            std::streamsize(bytes.size()));
  if (!out) throw IoError("write failed: " + path.string());
}

inline Image read_pnm(const std::filesystem::path& path) {
  return decode_pnm(read_file(path));
}

inline void write_pgm(const std::filesystem::path& path, const Image& img) {
  write_file(path, encode_pgm(img));
}

}  // namespace qvrf

#endif  // QVRF_IMAGE_HPP_
