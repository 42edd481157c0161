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

#ifndef QVRF_RATE_CONTROL_HPP_
#define QVRF_RATE_CONTROL_HPP_

// Regulator selection. Each Lagrange multiplier lambda_j in the set is paired
// with a regulator a_j minimizing R + lambda_j * D, where R is bits per pixel
// and D the pixel-domain MSE on 0..255 samples. Because the transform is
// fixed the summed objective separates per lambda, so every a_j is found by
// its own one-dimensional search. A straight line sqrt(lambda/lambda_ref) =
// slope * a + intercept through the optimized pairs then maps any lambda to
// a regulator for continuous rates.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "qvrf/codec.hpp"
#include "qvrf/entropy_model.hpp"
#include "qvrf/error.hpp"
#include "qvrf/metrics.hpp"
#include "qvrf/parallel.hpp"

namespace qvrf {

// The default eight-point Lagrange multiplier set.
inline const std::vector<double> kDefaultLambdas = {
    0.0018, 0.0035, 0.0067, 0.0130, 0.0250, 0.0483, 0.0932, 0.1800};

class LambdaSet {
 public:
  explicit LambdaSet(std::vector<double> values) : values_(std::move(values)) {
    if (values_.size() < 2) throw ConfigError("LambdaSet: need at least two values");
    for (std::size_t i = 0; i < values_.size(); ++i) {
      if (!(values_[i] > 0.0) || !std::isfinite(values_[i])) {
        throw ConfigError("LambdaSet: values must be positive");
      }
      if (i > 0 && !(values_[i] > values_[i - 1])) {
        throw ConfigError("LambdaSet: values must be strictly increasing");
      }
    }
  }

  const std::vector<double>& values() const { return values_; }
  std::size_t size() const { return values_.size(); }
  double operator[](std::size_t i) const { return values_[i]; }
  double lambda_ref() const { return values_.front(); }

 private:
  std::vector<double> values_;
};

struct RegulatorVector {
  std::vector<double> a;

  bool strictly_increasing() const {
    for (std::size_t i = 1; i < a.size(); ++i) {
      if (!(a[i] > a[i - 1])) return false;
    }
    return true;
  }
};

struct LinearFit {
  double slope = 1.0;
  double intercept = 0.0;
  double r_squared = 1.0;
  double lambda_ref = 1.0;
};

// a_j = sqrt(lambda_j / lambda_ref), so a_1 = 1.
inline RegulatorVector init_regulators(const LambdaSet& lambdas) {
  RegulatorVector v;
  for (const double l : lambdas.values()) v.a.push_back(std::sqrt(l / lambdas.lambda_ref()));
  v.a.front() = 1.0;
  return v;
}

enum class CostMode {
  kActual,    // coded bytes of the whole container
  kEstimate,  // -log2 of table masses for the latent, plus side and header
};

// Calibration images with their a-independent analysis done once.
class CalibrationSet {
 public:
  explicit CalibrationSet(const std::vector<Image>& images) {
    if (images.empty()) throw ConfigError("CalibrationSet: no images");
    prepared_.resize(images.size());
    for (std::size_t i = 0; i < images.size(); ++i) prepared_[i] = prepare_image(images[i]);
  }

  const std::vector<PreparedImage>& images() const { return prepared_; }

 private:
  std::vector<PreparedImage> prepared_;
};

struct RdMeasurement {
  double bpp = 0.0;
  double mse = 0.0;
};

inline RdMeasurement measure(const PreparedImage& prep, const Regulator& a, CostMode mode) {
  const EncodeResult enc = encode_prepared(prep, a);
  const double pixels = double(prep.source.pixel_count());
  RdMeasurement m;
  if (mode == CostMode::kActual) {
    m.bpp = 8.0 * double(enc.stream.size_bytes()) / pixels;
  } else {
    const double side_bits = double(prep.side.index.size()) * kScaleIndexBits;
    m.bpp = (enc.latent_ideal_bits + side_bits + 8.0 * double(kHeaderBytes)) / pixels;
  }
  m.mse = mse(prep.source, enc.reconstruction);
  return m;
}

// Mean over calibration images of bpp + lambda * MSE.
inline double rd_cost(const CalibrationSet& calib, const Regulator& a, double lambda,
                      CostMode mode = CostMode::kActual) {
  if (!(lambda >= 0.0)) throw ConfigError("rd_cost: lambda must be non-negative");
  double total = 0.0;
  for (const auto& prep : calib.images()) {
    const RdMeasurement m = measure(prep, a, mode);
    total += m.bpp + lambda * m.mse;
  }
  return total / double(calib.images().size());
}

struct SearchOptions {
  RegulatorBounds bounds{};
  int golden_iterations = 40;
  int grid_points = 64;
  double tolerance = 1e-3;  // relative, against the grid check
  CostMode mode = CostMode::kActual;
};

struct RegulatorSearchResult {
  double a = 0.0;
  double cost = 0.0;
  double grid_best_cost = 0.0;
  // Golden section disagreed with the grid; a is the grid argmin.
  bool fell_back_to_grid = false;
  int evaluations = 0;
};

namespace detail {

// Regulator values are rounded to binary32 before coding; search the same
// values so the reported cost is exactly what a container would produce.
inline double representable(double a) { return double(static_cast<float>(a)); }

}  // namespace detail

// Golden-section search over log(a) in [bounds.min, bounds.max], followed by
// a log-spaced grid check. If the golden result is worse than the grid
// minimum by more than the tolerance the cost is taken to be non-unimodal and
// the grid argmin is returned instead.
inline RegulatorSearchResult optimize_regulator(double lambda, const CalibrationSet& calib,
                                                const SearchOptions& opt = {}) {
  if (!(lambda > 0.0)) throw ConfigError("optimize_regulator: lambda must be positive");
  RegulatorSearchResult res;
  auto cost = [&](double a) {
    ++res.evaluations;
    return rd_cost(calib, Regulator(a, opt.bounds), lambda, opt.mode);
  };
  double best_a = opt.bounds.min;
  double best_cost = std::numeric_limits<double>::infinity();
  auto consider = [&](double a, double c) {
    if (c < best_cost) {
      best_cost = c;
      best_a = a;
    }
  };

  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double lo = std::log(opt.bounds.min);
  double hi = std::log(opt.bounds.max);
  auto at = [&](double t) {
    return std::clamp(detail::representable(std::exp(t)), opt.bounds.min, opt.bounds.max);
  };
  double c = hi - inv_phi * (hi - lo);
  double d = lo + inv_phi * (hi - lo);
  double fc = cost(at(c));
  double fd = cost(at(d));
  consider(at(c), fc);
  consider(at(d), fd);
  for (int i = 0; i < opt.golden_iterations; ++i) {
    if (fc < fd) {
      hi = d;
      d = c;
      fd = fc;
      c = hi - inv_phi * (hi - lo);
      fc = cost(at(c));
      consider(at(c), fc);
    } else {
      lo = c;
      c = d;
      fc = fd;
      d = lo + inv_phi * (hi - lo);
      fd = cost(at(d));
      consider(at(d), fd);
    }
  }
  consider(opt.bounds.min, cost(opt.bounds.min));
  consider(opt.bounds.max, cost(opt.bounds.max));

  double grid_a = opt.bounds.min;
  double grid_cost = std::numeric_limits<double>::infinity();
  const int n = std::max(2, opt.grid_points);
  for (int i = 0; i < n; ++i) {
    const double t = std::log(opt.bounds.min) +
                     (std::log(opt.bounds.max) - std::log(opt.bounds.min)) * i / (n - 1);
    const double a = at(t);
    const double g = cost(a);
    if (g < grid_cost) {
      grid_cost = g;
      grid_a = a;
    }
  }
  res.grid_best_cost = grid_cost;
  if (best_cost > grid_cost * (1.0 + opt.tolerance)) {
    res.fell_back_to_grid = true;
    best_cost = grid_cost;
    best_a = grid_a;
  }
  res.a = best_a;
  res.cost = best_cost;
  return res;
}

struct VectorOptimization {
  RegulatorVector regulators;
  std::vector<RegulatorSearchResult> searches;
  // False flags a cost-surface anomaly: the optimized regulators did not
  // grow with lambda.
  bool strictly_increasing = true;
};

// Element-wise optimize_regulator; the per-lambda searches run concurrently.
// Accepts any non-empty, strictly increasing lambda list.
inline VectorOptimization optimize_vector(const std::vector<double>& lambdas,
                                          const CalibrationSet& calib,
                                          const SearchOptions& opt = {},
                                          unsigned max_threads = 0) {
  if (lambdas.empty()) throw ConfigError("optimize_vector: no lambdas");
  for (std::size_t i = 1; i < lambdas.size(); ++i) {
    if (!(lambdas[i] > lambdas[i - 1])) {
      throw ConfigError("optimize_vector: lambdas must be strictly increasing");
    }
  }
  VectorOptimization out;
  out.searches.resize(lambdas.size());
  parallel_for(lambdas.size(), [&](std::size_t j) {
    out.searches[j] = optimize_regulator(lambdas[j], calib, opt);
  }, max_threads);
  for (const auto& s : out.searches) out.regulators.a.push_back(s.a);
  out.strictly_increasing = out.regulators.strictly_increasing();
  return out;
}

inline VectorOptimization optimize_vector(const LambdaSet& lambdas, const CalibrationSet& calib,
                                          const SearchOptions& opt = {},
                                          unsigned max_threads = 0) {
  return optimize_vector(lambdas.values(), calib, opt, max_threads);
}

// Ordinary least squares of sqrt(lambda_j / lambda_ref) on a_j.
inline LinearFit fit_sqrt_lambda_line(const RegulatorVector& regs, const LambdaSet& lambdas) {
  if (regs.a.size() != lambdas.size()) {
    throw ConfigError("fit: regulator and lambda counts differ");
  }
  const double n = double(regs.a.size());
  double mean_x = 0.0, mean_y = 0.0;
  std::vector<double> ys(regs.a.size());
  for (std::size_t i = 0; i < regs.a.size(); ++i) {
    ys[i] = std::sqrt(lambdas[i] / lambdas.lambda_ref());
    mean_x += regs.a[i];
    mean_y += ys[i];
  }
  mean_x /= n;
  mean_y /= n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < regs.a.size(); ++i) {
    const double dx = regs.a[i] - mean_x;
    const double dy = ys[i] - mean_y;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  if (!(sxx > 0.0)) throw ConfigError("fit: singular (all regulators equal)");
  LinearFit f;
  f.slope = sxy / sxx;
  f.intercept = mean_y - f.slope * mean_x;
  f.lambda_ref = lambdas.lambda_ref();
  double ss_res = 0.0;
  for (std::size_t i = 0; i < regs.a.size(); ++i) {
    const double e = ys[i] - (f.slope * regs.a[i] + f.intercept);
    ss_res += e * e;
  }
  f.r_squared = syy > 0.0 ? std::clamp(1.0 - ss_res / syy, 0.0, 1.0) : 1.0;
  return f;
}

// Inverts the fitted line and clamps into the regulator bounds.
inline double lambda_to_regulator(double lambda, const LinearFit& fit,
                                  RegulatorBounds bounds = {}) {
  if (!(lambda > 0.0)) throw ConfigError("lambda_to_regulator: lambda must be positive");
  if (!(fit.slope > 0.0) || !(fit.lambda_ref > 0.0)) {
    throw ConfigError("lambda_to_regulator: fit slope must be positive");
  }
  const double a = (std::sqrt(lambda / fit.lambda_ref) - fit.intercept) / fit.slope;
  return std::clamp(a, bounds.min, bounds.max);
}

// Plain-text regulator config:
//
//   # comment lines
//   <lambda> <a>          one line per pair, lambda ascending
//   slope=<s> intercept=<i> r2=<r>
struct FitConfig {
  std::vector<double> lambdas;
  RegulatorVector regulators;
  LinearFit fit;
};

inline void write_fit_config(std::ostream& out, const LambdaSet& lambdas,
                             const RegulatorVector& regs, const LinearFit& fit) {
  out << "# qvrf regulator fit: lambda a\n" << std::setprecision(17);
  for (std::size_t i = 0; i < lambdas.size(); ++i) {
    out << lambdas[i] << ' ' << regs.a[i] << '\n';
  }
  out << "slope=" << fit.slope << " intercept=" << fit.intercept << " r2=" << fit.r_squared
      << '\n';
}

inline FitConfig read_fit_config(std::istream& in) {
  FitConfig cfg;
  bool have_footer = false;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto first = line.find_first_not_of(" \t");
    if (first == std::string::npos || line[first] == '#') continue;
    if (line.find('=') != std::string::npos) {
      std::istringstream ss(line);
      std::string tok;
      int seen = 0;
      while (ss >> tok) {
        const auto eq = tok.find('=');
        if (eq == std::string::npos) throw FormatError("fit config: bad footer token " + tok);
        const std::string key = tok.substr(0, eq);
        double v = 0.0;
        try {
          v = std::stod(tok.substr(eq + 1));
        } catch (const std::logic_error&) {
          throw FormatError("fit config: bad value for " + key);
        }
        if (key == "slope") {
          cfg.fit.slope = v;
        } else if (key == "intercept") {
          cfg.fit.intercept = v;
        } else if (key == "r2") {
          cfg.fit.r_squared = v;
        } else {
          throw FormatError("fit config: unknown key " + key);
        }
        ++seen;
      }
      if (seen != 3) throw FormatError("fit config: footer needs slope, intercept and r2");
      have_footer = true;
      continue;
    }
    std::istringstream ss(line);
    double l = 0.0, a = 0.0;
    std::string extra;
    if (!(ss >> l >> a) || (ss >> extra)) throw FormatError("fit config: bad pair line: " + line);
    cfg.lambdas.push_back(l);
    cfg.regulators.a.push_back(a);
  }
  if (!have_footer) throw FormatError("fit config: missing slope/intercept/r2 footer");
  if (cfg.lambdas.empty()) throw FormatError("fit config: no lambda pairs");
  const LambdaSet validated(cfg.lambdas);
  cfg.fit.lambda_ref = validated.lambda_ref();
  return cfg;
}

}  // namespace qvrf

#endif  // QVRF_RATE_CONTROL_HPP_
