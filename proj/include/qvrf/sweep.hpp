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

#ifndef QVRF_SWEEP_HPP_
#define QVRF_SWEEP_HPP_

// Rate-distortion sweeps over the regulator and the CSV they are stored in:
//
//   image,a,lambda,bpp_total,bpp_latent,bpp_side,psnr_db,ms_ssim
//
// One row per (image, a), followed by one row per a with image "mean"
// averaging over all images. lambda is empty when no fit was supplied.

#include <cmath>
#include <cstddef>
#include <iomanip>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "qvrf/codec.hpp"
#include "qvrf/error.hpp"
#include "qvrf/metrics.hpp"
#include "qvrf/parallel.hpp"

namespace qvrf {

inline constexpr const char* kRdCsvHeader =
    "image,a,lambda,bpp_total,bpp_latent,bpp_side,psnr_db,ms_ssim";
inline constexpr const char* kMeanRowName = "mean";

struct RDPoint {
  double bpp = 0.0;
  double psnr = 0.0;
  double ms_ssim = 0.0;
};

struct RdRow {
  std::string image;
  double a = 0.0;
  std::optional<double> lambda;
  double bpp_total = 0.0;
  double bpp_latent = 0.0;
  double bpp_side = 0.0;
  double psnr_db = 0.0;
  double ms_ssim = 0.0;

  RDPoint point() const { return {bpp_total, psnr_db, ms_ssim}; }
};

struct NamedImage {
  std::string name;
  Image image;
};

// Encodes, decodes and measures one image at one regulator value.
inline RdRow evaluate_point(const PreparedImage& prep, const std::string& name, double a) {
  const EncodeResult enc = encode_prepared(prep, Regulator(a));
  const Image decoded = decode_image(enc.stream.serialize());
  const BitBreakdown bits = account_bits(enc.stream);
  RdRow row;
  row.image = name;
  row.a = enc.stream.header.a();
  row.bpp_total = bits.total_bpp;
  row.bpp_latent = bits.latent_bpp;
  row.bpp_side = bits.side_bpp;
  row.psnr_db = psnr(prep.source, decoded);
  row.ms_ssim = ms_ssim(prep.source, decoded);
  return row;
}

// Log-spaced regulator values; a single point yields a_min.
inline std::vector<double> log_spaced(double a_min, double a_max, int points) {
  if (points < 1 || !(a_min > 0.0) || !(a_max >= a_min)) {
    throw ConfigError("log_spaced: bad range");
  }
  std::vector<double> v(static_cast<std::size_t>(points));
  for (int i = 0; i < points; ++i) {
    const double t = points == 1 ? 0.0 : double(i) / double(points - 1);
    v[std::size_t(i)] = std::exp(std::log(a_min) + t * (std::log(a_max) - std::log(a_min)));
  }
  v.back() = points == 1 ? a_min : a_max;
  return v;
}

// Per-image rows in (image, a) order, then one mean row per a.
inline std::vector<RdRow> rd_sweep(const std::vector<NamedImage>& images,
                                   const std::vector<double>& a_values,
                                   unsigned max_threads = 0) {
  if (images.empty() || a_values.empty()) throw ConfigError("rd_sweep: empty input");
  std::vector<PreparedImage> prepared(images.size());
  parallel_for(images.size(), [&](std::size_t i) {
    try {
      prepared[i] = prepare_image(images[i].image);
    } catch (const Error& e) {
      throw Error(images[i].name + ": " + e.what());
    }
  }, max_threads);

  const std::size_t na = a_values.size();
  std::vector<RdRow> rows(images.size() * na);
  parallel_for(rows.size(), [&](std::size_t j) {
    const std::size_t i = j / na;
    try {
      rows[j] = evaluate_point(prepared[i], images[i].name, a_values[j % na]);
    } catch (const Error& e) {
      throw Error(images[i].name + " at a=" + std::to_string(a_values[j % na]) + ": " + e.what());
    }
  }, max_threads);

  for (std::size_t k = 0; k < na; ++k) {
    RdRow mean;
    mean.image = kMeanRowName;
    mean.a = rows[k].a;
    for (std::size_t i = 0; i < images.size(); ++i) {
      const RdRow& r = rows[i * na + k];
      mean.bpp_total += r.bpp_total;
      mean.bpp_latent += r.bpp_latent;
      mean.bpp_side += r.bpp_side;
      mean.psnr_db += r.psnr_db;
      mean.ms_ssim += r.ms_ssim;
    }
    const double n = double(images.size());
    mean.bpp_total /= n;
    mean.bpp_latent /= n;
    mean.bpp_side /= n;
    mean.psnr_db /= n;
    mean.ms_ssim /= n;
    rows.push_back(mean);
  }
  return rows;
}

inline void write_rd_csv(std::ostream& out, const std::vector<RdRow>& rows) {
  out << kRdCsvHeader << '\n';
  for (const auto& r : rows) {
    std::ostringstream line;
    line << std::setprecision(10) << r.image << ',' << r.a << ',';
    if (r.lambda) line << *r.lambda;
    line << ',' << r.bpp_total << ',' << r.bpp_latent << ',' << r.bpp_side << ','
         << r.psnr_db << ',' << r.ms_ssim;
    out << line.str() << '\n';
  }
}

inline std::vector<RdRow> read_rd_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw FormatError("RD CSV: empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kRdCsvHeader) throw FormatError("RD CSV: unexpected header: " + line);
  std::vector<RdRow> rows;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) f.push_back(cell);
    if (f.size() == 7 && line.back() == ',') f.emplace_back();
    if (f.size() != 8) {
      throw FormatError("RD CSV line " + std::to_string(line_no) + ": expected 8 fields");
    }
    try {
      RdRow r;
      r.image = f[0];
      r.a = std::stod(f[1]);
      if (!f[2].empty()) r.lambda = std::stod(f[2]);
      r.bpp_total = std::stod(f[3]);
      r.bpp_latent = std::stod(f[4]);
      r.bpp_side = std::stod(f[5]);
      r.psnr_db = std::stod(f[6]);
      r.ms_ssim = std::stod(f[7]);
      rows.push_back(std::move(r));
    } catch (const std::logic_error&) {
      throw FormatError("RD CSV line " + std::to_string(line_no) + ": bad number");
    }
  }
  return rows;
}

}  // namespace qvrf

#endif  // QVRF_SWEEP_HPP_
