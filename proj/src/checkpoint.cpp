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

#include "fedf/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>

namespace fedf {

namespace {

constexpr char kMagic[4] = {'F', 'E', 'D', 'F'};
constexpr std::uint8_t kFormatVersion = 1;

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) {
    out.push_back(static_cast<std::uint8_t>((v >> (8 * i)) & 0xFF));
  }
}

void put_u64(std::vector<std::uint8_t>& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) {
    out.push_back(static_cast<std::uint8_t>((v >> (8 * i)) & 0xFF));
  }
}

std::uint32_t get_u32(const std::uint8_t* p) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(p[i]) << (8 * i);
  return v;
}

std::uint64_t get_u64(const std::uint8_t* p) {
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(p[i]) << (8 * i);
  return v;
}

}  // namespace

std::size_t model_encoding_size(const ParameterVector& params) {
  return 4 + 1 + 4 + params.layout_id.size() + 8 + 8 * params.values.size();
}

std::vector<std::uint8_t> model_to_bytes(const ParameterVector& params) {
  std::vector<std::uint8_t> out;
  out.reserve(model_encoding_size(params));
  out.insert(out.end(), kMagic, kMagic + 4);
  out.push_back(kFormatVersion);
  put_u32(out, static_cast<std::uint32_t>(params.layout_id.size()));
  out.insert(out.end(), params.layout_id.begin(), params.layout_id.end());
  put_u64(out, params.values.size());
  for (double v : params.values) {
    put_u64(out, std::bit_cast<std::uint64_t>(v));
  }
  return out;
}

std::uint64_t model_param_count(const std::uint8_t* data, std::size_t size) {
  if (size < 9 || std::memcmp(data, kMagic, 4) != 0) {
    throw ParseError("model encoding: bad magic");
  }
  if (data[4] != kFormatVersion) {
    throw ParseError("model encoding: unsupported format version " +
                     std::to_string(data[4]));
  }
  const std::uint32_t id_len = get_u32(data + 5);
  if (size < 9ull + id_len + 8) {
    throw ParseError("model encoding: truncated header");
  }
  return get_u64(data + 9 + id_len);
}

ParameterVector model_from_bytes(const std::uint8_t* data, std::size_t size) {
  const std::uint64_t m = model_param_count(data, size);
  const std::uint32_t id_len = get_u32(data + 5);
  const std::size_t expect = 9ull + id_len + 8 + 8 * m;
  if (size != expect) {
    throw ParseError("model encoding: expected " + std::to_string(expect) +
                     " bytes, got " + std::to_string(size));
  }
  ParameterVector p;
  p.layout_id.assign(reinterpret_cast<const char*>(data + 9), id_len);
  p.values.resize(m);
  const std::uint8_t* cursor = data + 9 + id_len + 8;
  for (std::uint64_t i = 0; i < m; ++i, cursor += 8) {
    p.values[i] = std::bit_cast<double>(get_u64(cursor));
  }
  return p;
}

void save_model(const std::string& path, const ParameterVector& params) {
  const std::vector<std::uint8_t> bytes = model_to_bytes(params);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("save_model: cannot open " + path);
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw ValidationError("save_model: write failed for " + path);
}

ParameterVector load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("load_model: cannot open " + path);
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  return model_from_bytes(bytes.data(), bytes.size());
}

}  // namespace fedf
