// Copyright 2026 The FEDF Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "fedf/ternary.hpp"

#include <cstring>

#include "fedf/parallel.hpp"

namespace fedf {

namespace {

// 2-bit codes. 10 is reserved.
constexpr std::uint8_t kCodeZero = 0b00;
constexpr std::uint8_t kCodePlus = 0b01;
constexpr std::uint8_t kCodeMinus = 0b11;
constexpr std::uint8_t kCodeReserved = 0b10;

inline std::int8_t first_epoch_trit(double q, double p0, double alpha_k) {
  const double d = q - p0;
  if (d < -alpha_k) return -1;
  if (d > alpha_k) return 1;
  return 0;
}

inline std::int8_t subsequent_trit(double q, double p_prev, double p_prev2,
                                   double beta_k) {
  const double step_now = q - p_prev;
  const double step_before = p_prev - p_prev2;
  if (std::abs(step_now) < beta_k * std::abs(step_before)) return 0;
  const double f = step_now * step_before;
  if (f > 0.0) return 1;
  if (f < 0.0) return -1;
  return 0;
}

inline std::uint8_t encode_trit(std::int8_t t) {
  switch (t) {
    case 0:
      return kCodeZero;
    case 1:
      return kCodePlus;
    case -1:
      return kCodeMinus;
    default:
      throw CorruptEncodingError("pack: trit value out of {-1,0,+1}: " +
                                 std::to_string(static_cast<int>(t)));
  }
}

inline std::int8_t decode_trit(std::uint8_t code) {
  switch (code) {
    case kCodeZero:
      return 0;
    case kCodePlus:
      return 1;
    case kCodeMinus:
      return -1;
    case kCodeReserved:
    default:
      throw CorruptEncodingError("unpack: reserved bit pattern 10");
  }
}

inline std::uint8_t pack_group(const std::int8_t* trits, std::size_t count) {
  std::uint8_t byte = 0;
  for (std::size_t j = 0; j < count; ++j) {
    byte = static_cast<std::uint8_t>(byte | (encode_trit(trits[j]) << (6 - 2 * j)));
  }
  return byte;
}

}  // namespace

bool TernaryVector::all_zero() const {
  for (std::int8_t t : trits) {
    if (t != 0) return false;
  }
  return true;
}

TernaryVector ternary_first_epoch(const ParameterVector& q,
                                  const ParameterVector& p0, double alpha_k) {
  ensure_same_layout(q, p0, "ternary_first_epoch");
  const std::size_t m = q.size();
  TernaryVector out;
  out.trits.resize(m);
  FEDF_PARALLEL_FOR(m)
  for (std::int64_t i = 0; i < static_cast<std::int64_t>(m); ++i) {
    out.trits[i] = first_epoch_trit(q.values[i], p0.values[i], alpha_k);
  }
  return out;
}

TernaryVector ternary_subsequent(const ParameterVector& q,
                                 const ParameterVector& p_prev,
                                 const ParameterVector& p_prev2,
                                 double beta_k) {
  ensure_same_layout(q, p_prev, "ternary_subsequent");
  ensure_same_layout(q, p_prev2, "ternary_subsequent");
  const std::size_t m = q.size();
  TernaryVector out;
  out.trits.resize(m);
  FEDF_PARALLEL_FOR(m)
  for (std::int64_t i = 0; i < static_cast<std::int64_t>(m); ++i) {
    out.trits[i] = subsequent_trit(q.values[i], p_prev.values[i],
                                   p_prev2.values[i], beta_k);
  }
  return out;
}

PackedTernary pack(const TernaryVector& t) {
  const std::size_t m = t.size();
  PackedTernary out;
  out.trit_count = m;
  out.byte_buffer.resize(packed_byte_count(m));
  const std::size_t full_groups = m / 4;
  FEDF_PARALLEL_FOR(full_groups)
  for (std::int64_t g = 0; g < static_cast<std::int64_t>(full_groups); ++g) {
    out.byte_buffer[g] = pack_group(&t.trits[4 * g], 4);
  }
  if (m % 4 != 0) {
    out.byte_buffer.back() = pack_group(&t.trits[4 * full_groups], m % 4);
  }
  return out;
}

TernaryVector unpack(const PackedTernary& p) {
  const std::size_t m = static_cast<std::size_t>(p.trit_count);
  if (p.byte_buffer.size() != packed_byte_count(m)) {
    throw CorruptEncodingError(
        "unpack: buffer holds " + std::to_string(p.byte_buffer.size()) +
        " bytes but " + std::to_string(packed_byte_count(m)) +
        " are required for " + std::to_string(m) + " trits");
  }
  TernaryVector out;
  out.trits.resize(m);
  for (std::size_t i = 0; i < m; ++i) {
    const std::uint8_t byte = p.byte_buffer[i / 4];
    const std::uint8_t code =
        static_cast<std::uint8_t>((byte >> (6 - 2 * (i % 4))) & 0b11);
    out.trits[i] = decode_trit(code);
  }
  // Padding slots must stay the encoding of zero.
  if (m % 4 != 0) {
    const std::uint8_t tail = p.byte_buffer.back();
    const std::uint8_t mask =
        static_cast<std::uint8_t>(0xFF >> (2 * (m % 4)));
    if ((tail & mask) != 0) {
      throw CorruptEncodingError("unpack: nonzero padding in final byte");
    }
  }
  return out;
}

std::vector<std::uint8_t> packed_to_bytes(const PackedTernary& p) {
  std::vector<std::uint8_t> out(8 + p.byte_buffer.size());
  for (int i = 0; i < 8; ++i) {
    out[i] = static_cast<std::uint8_t>((p.trit_count >> (8 * i)) & 0xFF);
  }
  std::memcpy(out.data() + 8, p.byte_buffer.data(), p.byte_buffer.size());
  return out;
}

PackedTernary packed_from_bytes(const std::uint8_t* data, std::size_t size) {
  if (size < 8) {
    throw CorruptEncodingError("packed ternary: missing 8-byte length header");
  }
  std::uint64_t m = 0;
  for (int i = 0; i < 8; ++i) {
    m |= static_cast<std::uint64_t>(data[i]) << (8 * i);
  }
  if (size - 8 != packed_byte_count(m)) {
    throw CorruptEncodingError(
        "packed ternary: buffer length " + std::to_string(size - 8) +
        " inconsistent with trit count " + std::to_string(m));
  }
  PackedTernary out;
  out.trit_count = m;
  out.byte_buffer.assign(data + 8, data + size);
  return out;
}

namespace serial {

TernaryVector ternary_first_epoch(const ParameterVector& q,
                                  const ParameterVector& p0, double alpha_k) {
  ensure_same_layout(q, p0, "ternary_first_epoch");
  TernaryVector out;
  out.trits.resize(q.size());
  for (std::size_t i = 0; i < q.size(); ++i) {
    out.trits[i] = first_epoch_trit(q.values[i], p0.values[i], alpha_k);
  }
  return out;
}

TernaryVector ternary_subsequent(const ParameterVector& q,
                                 const ParameterVector& p_prev,
                                 const ParameterVector& p_prev2,
                                 double beta_k) {
  ensure_same_layout(q, p_prev, "ternary_subsequent");
  ensure_same_layout(q, p_prev2, "ternary_subsequent");
  TernaryVector out;
  out.trits.resize(q.size());
  for (std::size_t i = 0; i < q.size(); ++i) {
    out.trits[i] = subsequent_trit(q.values[i], p_prev.values[i],
                                   p_prev2.values[i], beta_k);
  }
  return out;
}

PackedTernary pack(const TernaryVector& t) {
  PackedTernary out;
  out.trit_count = t.size();
  out.byte_buffer.assign(packed_byte_count(t.size()), 0);
  for (std::size_t i = 0; i < t.size(); ++i) {
    out.byte_buffer[i / 4] = static_cast<std::uint8_t>(
        out.byte_buffer[i / 4] | (encode_trit(t.trits[i]) << (6 - 2 * (i % 4))));
  }
  return out;
}

TernaryVector unpack(const PackedTernary& p) { return fedf::unpack(p); }

}  // namespace serial

}  // namespace fedf
