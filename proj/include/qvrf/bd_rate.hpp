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

#ifndef QVRF_BD_RATE_HPP_
#define QVRF_BD_RATE_HPP_

// Bjontegaard delta rate. Each curve's natural-log rate is fitted by a single
// least-squares cubic in quality; the fitted polynomials are integrated over
// the common quality interval and the mean log-rate gap d is reported as
// (exp(d) - 1) * 100 percent. Positive means the test curve needs more bits.

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "qvrf/error.hpp"
#include "qvrf/sweep.hpp"

namespace qvrf {

inline constexpr int kBdRateMinPoints = 4;
// Fits whose scaled Vandermonde matrix is worse conditioned are rejected.
inline constexpr double kBdRateMaxCondition = 1e8;

struct RateQuality {
  double rate = 0.0;     // bpp
  double quality = 0.0;  // dB
};

struct RDCurve {
  std::vector<RateQuality> points;

  void validate() const {
    if (points.size() < std::size_t(kBdRateMinPoints)) {
      throw ConfigError("RD curve: need at least 4 points");
    }
    for (std::size_t i = 0; i < points.size(); ++i) {
      if (!(points[i].rate > 0.0) || !std::isfinite(points[i].rate) ||
          !std::isfinite(points[i].quality)) {
        throw ConfigError("RD curve: rates must be positive and finite");
      }
      if (i > 0 && !(points[i].rate > points[i - 1].rate)) {
        throw ConfigError("RD curve: rates must be strictly increasing");
      }
    }
  }
};

// Cubic in t = (quality - center) / half_width.
struct LogRatePolynomial {
  std::array<double, 4> coef{};  // ascending powers of t
  double center = 0.0;
  double half_width = 1.0;
  double condition = 1.0;

  double operator()(double quality) const {
    const double t = (quality - center) / half_width;
    return coef[0] + t * (coef[1] + t * (coef[2] + t * coef[3]));
  }

  // Integral over quality in [lo, hi].
  double integrate(double lo, double hi) const {
    auto antiderivative = [this](double q) {
      const double t = (q - center) / half_width;
      return half_width *
             t * (coef[0] + t * (coef[1] / 2.0 + t * (coef[2] / 3.0 + t * coef[3] / 4.0)));
    };
    return antiderivative(hi) - antiderivative(lo);
  }
};

inline LogRatePolynomial fit_log_rate(const RDCurve& curve) {
  curve.validate();
  const auto [qmin_it, qmax_it] = std::minmax_element(
      curve.points.begin(), curve.points.end(),
      [](const RateQuality& x, const RateQuality& y) { return x.quality < y.quality; });
  LogRatePolynomial p;
  p.center = 0.5 * (qmin_it->quality + qmax_it->quality);
  p.half_width = 0.5 * (qmax_it->quality - qmin_it->quality);
  if (!(p.half_width > 0.0)) throw ConfigError("BD-rate: curve has no quality spread");

  const Eigen::Index n = Eigen::Index(curve.points.size());
  Eigen::MatrixXd v(n, 4);
  Eigen::VectorXd rhs(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double t = (curve.points[std::size_t(i)].quality - p.center) / p.half_width;
    v(i, 0) = 1.0;
    v(i, 1) = t;
    v(i, 2) = t * t;
    v(i, 3) = t * t * t;
    rhs(i) = std::log(curve.points[std::size_t(i)].rate);
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(v, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& sv = svd.singularValues();
  p.condition = sv(sv.size() - 1) > 0.0 ? sv(0) / sv(sv.size() - 1)
                                        : std::numeric_limits<double>::infinity();
  if (!(p.condition <= kBdRateMaxCondition)) {
    std::ostringstream msg;
    msg << "BD-rate: ill-conditioned cubic fit (condition number " << p.condition << ")";
    throw ConfigError(msg.str());
  }
  const Eigen::VectorXd c = svd.solve(rhs);
  for (int i = 0; i < 4; ++i) p.coef[std::size_t(i)] = c(i);
  return p;
}

struct QualityInterval {
  double lo = 0.0;
  double hi = 0.0;
};

inline QualityInterval common_quality_interval(const RDCurve& a, const RDCurve& b) {
  auto range = [](const RDCurve& c) {
    const auto [lo, hi] = std::minmax_element(
        c.points.begin(), c.points.end(),
        [](const RateQuality& x, const RateQuality& y) { return x.quality < y.quality; });
    return QualityInterval{lo->quality, hi->quality};
  };
  const auto ra = range(a);
  const auto rb = range(b);
  const QualityInterval out{std::max(ra.lo, rb.lo), std::min(ra.hi, rb.hi)};
  if (!(out.hi > out.lo)) throw ConfigError("BD-rate: curves do not overlap in quality");
  return out;
}

inline double bd_rate(const RDCurve& anchor, const RDCurve& test) {
  const LogRatePolynomial pa = fit_log_rate(anchor);
  const LogRatePolynomial pt = fit_log_rate(test);
  const QualityInterval q = common_quality_interval(anchor, test);
  const double mean_diff =
      (pt.integrate(q.lo, q.hi) - pa.integrate(q.lo, q.hi)) / (q.hi - q.lo);
  return (std::exp(mean_diff) - 1.0) * 100.0;
}

// Picks the rate/PSNR curve out of sweep rows: the "mean" rows when present,
// otherwise the rows of the only image. Sorted by rate.
inline RDCurve curve_from_rows(const std::vector<RdRow>& rows) {
  std::vector<const RdRow*> picked;
  for (const auto& r : rows) {
    if (r.image == kMeanRowName) picked.push_back(&r);
  }
  if (picked.empty()) {
    for (const auto& r : rows) {
      if (r.image != rows.front().image) {
        throw ConfigError("RD CSV: several images and no mean rows");
      }
      picked.push_back(&r);
    }
  }
  RDCurve c;
  for (const auto* r : picked) c.points.push_back({r->bpp_total, r->psnr_db});
  std::sort(c.points.begin(), c.points.end(),
            [](const RateQuality& x, const RateQuality& y) { return x.rate < y.rate; });
  return c;
}

}  // namespace qvrf

#endif  // QVRF_BD_RATE_HPP_
