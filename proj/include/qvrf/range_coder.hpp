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

#ifndef QVRF_RANGE_CODER_HPP_
#define QVRF_RANGE_CODER_HPP_

// Carry-less range coder (Subbotin style) with byte-wise renormalization.
// 32-bit range register, low accumulator held in 64 bits and kept below
// 2^32, 16-bit symbol frequencies. Integer-only: given the same integer
// tables, encoder and decoder are bit-exact on every platform.
//
// Each coding step splits range into 2^16 units of r = range >> 16. The
// leftover range - (r << 16) is not dropped: it widens the table's most
// probable slot, so near-certain symbols cost close to their ideal
// -log2(p) instead of the truncation loss.

#include <bit>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "qvrf/entropy_model.hpp"
#include "qvrf/error.hpp"

namespace qvrf {

// Upper bound on bytes spent flushing the coder state.
inline constexpr std::size_t kCoderOverheadBytes = 8;

namespace detail {
inline constexpr std::uint64_t kRangeTop = 1ull << 24;
inline constexpr std::uint64_t kRangeBottom = 1ull << 16;
inline constexpr std::uint64_t kLowMask = 0xFFFFFFFFull;
}  // namespace detail

class RangeEncoder {
 public:
  // k must lie in [k_min - 1, k_max + 1]; both sentinels select the escape
  // slot.
  void encode_symbol(const SymbolDistribution& dist, Symbol k) {
    if (k < dist.k_min() - 1 || k > dist.k_max() + 1) {
      throw ConfigError("encode_symbol: symbol outside window and sentinels");
    }
    const int slot = dist.slot_for(k);
    const int m = dist.remainder_slot();
    const std::uint64_t r = range_ >> kPrecisionBits;
    const std::uint64_t rem = range_ - (r << kPrecisionBits);
    low_ += r * dist.cumulative(slot) + (slot > m ? rem : 0);
    range_ = r * dist.mass(slot) + (slot == m ? rem : 0);
    normalize();
    ideal_bits_ += dist.cost_bits(slot);
  }

  void encode_raw_bits(std::uint32_t value, int n_bits) {
    if (n_bits < 0 || n_bits > 32 ||
        (n_bits < 32 && (std::uint64_t(value) >> n_bits) != 0)) {
      throw ConfigError("encode_raw_bits: value does not fit");
    }
    if (n_bits > 16) {
      encode_raw_chunk(value >> 16, n_bits - 16);
      encode_raw_chunk(value & 0xFFFFu, 16);
    } else {
      encode_raw_chunk(value, n_bits);
    }
    ideal_bits_ += n_bits;
  }

  // Flushes the low register. The encoder must not be used afterwards.
  std::vector<std::uint8_t> finish() {
    for (int i = 0; i < 4; ++i) shift_byte();
    return std::move(out_);
  }

  // Sum of -log2(mass / 2^16) over coded symbols plus raw bits.
  double ideal_bits() const { return ideal_bits_; }
  std::size_t bytes_written() const { return out_.size(); }

 private:
  void encode_raw_chunk(std::uint32_t value, int n_bits) {
    if (n_bits == 0) return;
    range_ >>= n_bits;
    low_ += std::uint64_t(value) * range_;
    normalize();
  }

  void normalize() {
    for (;;) {
      if ((low_ ^ (low_ + range_)) >= detail::kRangeTop) {
        if (range_ >= detail::kRangeBottom) break;
        range_ = (0 - low_) & (detail::kRangeBottom - 1);
      }
      shift_byte();
      range_ <<= 8;
    }
  }

  void shift_byte() {
    out_.push_back(static_cast<std::uint8_t>(low_ >> 24));
    low_ = (low_ << 8) & detail::kLowMask;
  }

  std::uint64_t low_ = 0;
  std::uint64_t range_ = detail::kLowMask;
  std::vector<std::uint8_t> out_;
  double ideal_bits_ = 0.0;
};

class RangeDecoder {
 public:
  // The span must outlive the decoder.
  explicit RangeDecoder(std::span<const std::uint8_t> data) : data_(data) {
    for (int i = 0; i < 4; ++i) code_ = (code_ << 8) | next_byte();
  }

  // Returns the decoded symbol, or dist.escape_symbol() for the escape slot.
  Symbol decode_symbol(const SymbolDistribution& dist) {
    const int m = dist.remainder_slot();
    const std::uint64_t r = range_ >> kPrecisionBits;
    const std::uint64_t rem = range_ - (r << kPrecisionBits);
    const std::uint64_t off = offset();
    const std::uint64_t split_lo = r * dist.cumulative(m);
    const std::uint64_t split_hi = split_lo + r * dist.mass(m) + rem;
    int slot = m;
    if (off < split_lo) {
      slot = dist.find_slot(static_cast<std::uint32_t>(off / r));
    } else if (off >= split_hi) {
      const std::uint64_t value = (off - rem) / r;
      if (value >= kTotalMass) throw FormatError("range decoder: corrupt stream");
      slot = dist.find_slot(static_cast<std::uint32_t>(value));
    }
    low_ += r * dist.cumulative(slot) + (slot > m ? rem : 0);
    range_ = r * dist.mass(slot) + (slot == m ? rem : 0);
    normalize();
    return dist.symbol_for(slot);
  }

  std::uint32_t decode_raw_bits(int n_bits) {
    if (n_bits < 0 || n_bits > 32) {
      throw ConfigError("decode_raw_bits: bad bit count");
    }
    if (n_bits > 16) {
      const std::uint32_t hi = decode_raw_chunk(n_bits - 16);
      return (hi << 16) | decode_raw_chunk(16);
    }
    return decode_raw_chunk(n_bits);
  }

  std::size_t bytes_consumed() const { return pos_; }

 private:
  std::uint64_t offset() const { return (code_ - low_) & detail::kLowMask; }

  std::uint32_t decode_raw_chunk(int n_bits) {
    if (n_bits == 0) return 0;
    range_ >>= n_bits;
    const std::uint64_t value = offset() / range_;
    if (value >> n_bits) throw FormatError("range decoder: corrupt stream");
    low_ += value * range_;
    normalize();
    return static_cast<std::uint32_t>(value);
  }

  void normalize() {
    for (;;) {
      if ((low_ ^ (low_ + range_)) >= detail::kRangeTop) {
        if (range_ >= detail::kRangeBottom) break;
        range_ = (0 - low_) & (detail::kRangeBottom - 1);
      }
      code_ = ((code_ << 8) | next_byte()) & detail::kLowMask;
      low_ = (low_ << 8) & detail::kLowMask;
      range_ <<= 8;
    }
  }

  std::uint64_t next_byte() {
    if (pos_ >= data_.size()) {
      throw StreamExhausted("range decoder: stream exhausted");
    }
    return data_[pos_++];
  }

  std::span<const std::uint8_t> data_;
  std::size_t pos_ = 0;
  std::uint64_t low_ = 0;
  std::uint64_t range_ = detail::kLowMask;
  std::uint64_t code_ = 0;
};

// Codes any symbol against a windowed table: in-window symbols directly,
// anything else as the escape slot followed by a direction bit and the
// distance past the window edge (5-bit length prefix, then the value's
// remaining bits).
inline void encode_value(RangeEncoder& enc, const SymbolDistribution& dist,
                         Symbol k) {
  if (dist.in_window(k)) {
    enc.encode_symbol(dist, k);
    return;
  }
  enc.encode_symbol(dist, dist.escape_symbol());
  const bool above = k > dist.k_max();
  const std::uint64_t distance =
      above ? std::uint64_t(std::int64_t(k) - dist.k_max() - 1)
            : std::uint64_t(std::int64_t(dist.k_min()) - k - 1);
  const std::uint64_t v = distance + 1;
  const int len = std::bit_width(v);
  enc.encode_raw_bits(above ? 1u : 0u, 1);
  enc.encode_raw_bits(static_cast<std::uint32_t>(len - 1), 5);
  enc.encode_raw_bits(static_cast<std::uint32_t>(v & ((1ull << (len - 1)) - 1)),
                      len - 1);
}

inline Symbol decode_value(RangeDecoder& dec, const SymbolDistribution& dist) {
  const Symbol k = dec.decode_symbol(dist);
  if (k != dist.escape_symbol()) return k;
  const bool above = dec.decode_raw_bits(1) != 0;
  const int len = int(dec.decode_raw_bits(5)) + 1;
  const std::uint64_t v = (1ull << (len - 1)) | dec.decode_raw_bits(len - 1);
  const std::int64_t distance = std::int64_t(v) - 1;
  const std::int64_t k_out = above ? std::int64_t(dist.k_max()) + 1 + distance
                                   : std::int64_t(dist.k_min()) - 1 - distance;
  if (std::fabs(double(k_out)) > kMaxSymbolMagnitude) {
    throw FormatError("decode_value: escaped symbol out of range");
  }
  return static_cast<Symbol>(k_out);
}

}  // namespace qvrf

#endif  // QVRF_RANGE_CODER_HPP_
