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

#include <cstddef>

#if defined(_OPENMP)
#include <omp.h>
#endif

namespace fedf {

// Loops below this element count stay serial; the fork/join cost dominates
// at protocol scale. The cutoff never changes results: every parallel loop
// in the project writes disjoint outputs and performs its per-output
// floating-point sums in the same order as the serial reference, so results
// are bit-identical for any thread count.
inline constexpr std::size_t kParallelGrain = 4096;

}  // namespace fedf

#if defined(_OPENMP)
#define FEDF_PRAGMA_(text) _Pragma(#text)
#define FEDF_PARALLEL_FOR(n) \
  FEDF_PRAGMA_(omp parallel for schedule(static) \
                   if ((n) >= ::fedf::kParallelGrain))
#else
#define FEDF_PARALLEL_FOR(n)
#endif
