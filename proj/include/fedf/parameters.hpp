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

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "fedf/errors.hpp"

namespace fedf {

using WorkerId = std::uint32_t;

// Id 0 is reserved for the master on the wire and in transcripts.
inline constexpr WorkerId kMasterId = 0;

// Flat ordered vector of model parameters. The layout id binds index i to an
// architecture slot so that master and workers agree on the meaning of every
// position.
struct ParameterVector {
  std::string layout_id;
  std::vector<double> values;

  std::size_t size() const { return values.size(); }
};

inline void ensure_same_layout(const ParameterVector& a,
                               const ParameterVector& b,
                               const char* context) {
  if (a.values.size() != b.values.size()) {
    throw DimensionError(std::string(context) + ": parameter count mismatch (" +
                         std::to_string(a.values.size()) + " vs " +
                         std::to_string(b.values.size()) + ")");
  }
}

inline void ensure_finite(const std::vector<double>& values,
                          const char* context) {
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!std::isfinite(values[i])) {
      throw DivergenceError(std::string(context) + ": non-finite value at index " +
                            std::to_string(i));
    }
  }
}

inline void ensure_finite(const ParameterVector& p, const char* context) {
  ensure_finite(p.values, context);
}

}  // namespace fedf
