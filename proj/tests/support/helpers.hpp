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

#include <cstdio>
#include <filesystem>
#include <random>
#include <string>

#include "fedf/data.hpp"
#include "fedf/model.hpp"
#include "fedf/rng.hpp"

namespace helpers {

class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    auto base = std::filesystem::temp_directory_path();
    path_ = (base / (tag + "-" + std::to_string(std::random_device{}())))
                .string();
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

inline fedf::DataShard random_shard(std::size_t n, std::size_t feature_dim,
                                    std::size_t target_dim,
                                    std::uint64_t seed) {
  fedf::DataShard shard;
  shard.feature_dim = feature_dim;
  shard.target_dim = target_dim;
  fedf::Rng64 rng(seed);
  for (std::size_t i = 0; i < n * feature_dim; ++i) {
    shard.features.push_back(rng.uniform(-1.0, 1.0));
  }
  for (std::size_t i = 0; i < n * target_dim; ++i) {
    shard.targets.push_back(rng.uniform(-1.0, 1.0));
  }
  return shard;
}

inline fedf::DataShard random_class_shard(std::size_t n,
                                          std::size_t feature_dim,
                                          std::size_t n_classes,
                                          std::uint64_t seed) {
  fedf::DataShard shard;
  shard.feature_dim = feature_dim;
  shard.target_dim = 1;
  fedf::Rng64 rng(seed);
  for (std::size_t i = 0; i < n * feature_dim; ++i) {
    shard.features.push_back(rng.uniform(-1.0, 1.0));
  }
  for (std::size_t i = 0; i < n; ++i) {
    shard.targets.push_back(static_cast<double>(rng.next_below(n_classes)));
  }
  return shard;
}

inline fedf::ParameterVector random_params(const fedf::ModelSpec& spec,
                                           std::uint64_t seed) {
  return fedf::init_parameters(spec, seed);
}

// Runs a command, captures stdout(+stderr), returns the exit code.
inline int run_command(const std::string& command, std::string& output) {
  output.clear();
  FILE* pipe = popen((command + " 2>&1").c_str(), "r");
  if (pipe == nullptr) return -1;
  char buf[4096];
  while (std::fgets(buf, sizeof buf, pipe) != nullptr) output += buf;
  const int status = pclose(pipe);
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace helpers
