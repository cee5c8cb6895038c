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

#pragma once

#include <cstdint>
#include <vector>

#include "fedf/parameters.hpp"

namespace fedf {

// Per-parameter evolution direction, one trit in {-1, 0, +1} per model
// parameter.
struct TernaryVector {
  std::vector<std::int8_t> trits;

  std::size_t size() const { return trits.size(); }
  bool all_zero() const;
};

// 2-bit packing of a ternary vector: 0 -> 00, +1 -> 01, -1 -> 11. The code
// 10 is reserved so corruption is detectable. The first trit of each group
// of four occupies the two most significant bits of its byte; the tail of
// the final byte is padded with 00.
struct PackedTernary {
  std::vector<std::uint8_t> byte_buffer;
  std::uint64_t trit_count = 0;
};

// Exact size of the packed buffer for m trits.
inline std::size_t packed_byte_count(std::uint64_t m) {
  return static_cast<std::size_t>((m + 3) / 4);
}

// First-epoch ternarization: compares the locally trained parameters against
// the master's initial instance, with the worker's own learning rate as the
// dead-zone half-width.
//
//   -1  if q_i - p0_i < -alpha_k
//    0  if |q_i - p0_i| <= alpha_k
//   +1  if q_i - p0_i > alpha_k
TernaryVector ternary_first_epoch(const ParameterVector& q,
                                  const ParameterVector& p0, double alpha_k);

// Ternarization from the second epoch onward, based on the two most recent
// master instances the worker has kept:
//
//    0        if |q_i - p_prev_i| < beta_k * |p_prev_i - p_prev2_i|
//    sign(f)  otherwise, with f = (q_i - p_prev_i) * (p_prev_i - p_prev2_i)
//
// and sign(0) = 0: a zero product gives no reliable direction.
TernaryVector ternary_subsequent(const ParameterVector& q,
                                 const ParameterVector& p_prev,
                                 const ParameterVector& p_prev2,
                                 double beta_k);

PackedTernary pack(const TernaryVector& t);

// Exact inverse of pack. Throws CorruptEncodingError on the reserved code 10
// or on nonzero padding in the final byte.
TernaryVector unpack(const PackedTernary& p);

// Wire form: trit count as 64-bit little-endian unsigned, then the packed
// bytes.
std::vector<std::uint8_t> packed_to_bytes(const PackedTernary& p);
PackedTernary packed_from_bytes(const std::uint8_t* data, std::size_t size);

// Serial reference implementations, kept for tests and the kernel benchmark.
// The OpenMP paths above must match them bit for bit.
namespace serial {
TernaryVector ternary_first_epoch(const ParameterVector& q,
                                  const ParameterVector& p0, double alpha_k);
TernaryVector ternary_subsequent(const ParameterVector& q,
                                 const ParameterVector& p_prev,
                                 const ParameterVector& p_prev2,
                                 double beta_k);
PackedTernary pack(const TernaryVector& t);
TernaryVector unpack(const PackedTernary& p);
}  // namespace serial

}  // namespace fedf
