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
#include <string>
#include <vector>

#include "fedf/parameters.hpp"

namespace fedf {

// Model checkpoint encoding, used both for files and for model payloads on
// the wire:
//
//   "FEDF"            4 magic bytes
//   version           1 byte (currently 1)
//   layout_id length  u32 little-endian
//   layout_id         raw bytes
//   M                 u64 little-endian
//   values            M IEEE-754 doubles, little-endian
std::vector<std::uint8_t> model_to_bytes(const ParameterVector& params);
ParameterVector model_from_bytes(const std::uint8_t* data, std::size_t size);

// Byte size of the encoding without materializing it.
std::size_t model_encoding_size(const ParameterVector& params);

// Parameter count of an encoded model, without decoding the values.
std::uint64_t model_param_count(const std::uint8_t* data, std::size_t size);

void save_model(const std::string& path, const ParameterVector& params);
ParameterVector load_model(const std::string& path);

}  // namespace fedf
