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

#include "fedf/data.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "fedf/rng.hpp"

namespace fedf {

namespace {

void check_finite_cell(double v, std::size_t line, const std::string& path) {
  if (!std::isfinite(v)) {
    throw ParseError(path + ": non-finite value at line " +
                     std::to_string(line));
  }
}

// Gamma(5, 1) as the sum of five unit exponentials. Normalizing these draws
// gives the symmetric Dirichlet with concentration 5.0 used by split().
double gamma5(Rng64& rng) {
  double acc = 0.0;
  for (int i = 0; i < 5; ++i) {
    acc += -std::log1p(-rng.next_unit());
  }
  return acc;
}

}  // namespace

DataShard take_rows(const DataShard& data,
                    const std::vector<std::size_t>& rows) {
  DataShard out;
  out.feature_dim = data.feature_dim;
  out.target_dim = data.target_dim;
  out.features.reserve(rows.size() * data.feature_dim);
  out.targets.reserve(rows.size() * data.target_dim);
  for (std::size_t r : rows) {
    out.features.insert(out.features.end(), data.feature_row(r),
                        data.feature_row(r) + data.feature_dim);
    out.targets.insert(out.targets.end(), data.target_row(r),
                       data.target_row(r) + data.target_dim);
  }
  return out;
}

SyntheticData generate_synthetic(SyntheticKind kind, std::size_t n,
                                 std::size_t dim, double noise_sigma,
                                 std::uint64_t seed) {
  if (n == 0 || dim == 0) {
    throw ValidationError("generate_synthetic: n and dim must be >= 1");
  }
  if (noise_sigma < 0.0) {
    throw ValidationError("generate_synthetic: noise_sigma must be >= 0");
  }
  SyntheticData out;
  out.manifest.kind = kind;
  out.manifest.n = n;
  out.manifest.dim = dim;
  out.manifest.noise_sigma = noise_sigma;
  out.manifest.seed = seed;
  DataShard& shard = out.shard;
  shard.feature_dim = dim;
  shard.target_dim = 1;
  shard.features.reserve(n * dim);
  shard.targets.reserve(n);
  Rng64 rng(seed);

  switch (kind) {
    case SyntheticKind::kLinear:
    case SyntheticKind::kQuadratic: {
      out.manifest.true_weights.resize(dim);
      for (std::size_t i = 0; i < dim; ++i) {
        out.manifest.true_weights[i] = rng.uniform(-1.0, 1.0);
      }
      out.manifest.true_bias = rng.uniform(-1.0, 1.0);
      for (std::size_t j = 0; j < n; ++j) {
        double dot = out.manifest.true_bias;
        for (std::size_t i = 0; i < dim; ++i) {
          const double x = rng.uniform(-1.0, 1.0);
          shard.features.push_back(x);
          dot += out.manifest.true_weights[i] * x;
        }
        double y = kind == SyntheticKind::kQuadratic ? dot * dot : dot;
        if (noise_sigma > 0.0) y += noise_sigma * rng.next_normal();
        shard.targets.push_back(y);
      }
      break;
    }
    case SyntheticKind::kLogisticBlobs: {
      // Two balanced classes centered at -1 and +1 on every axis.
      out.manifest.blob_centers.resize(2 * dim);
      for (std::size_t i = 0; i < dim; ++i) {
        out.manifest.blob_centers[i] = -1.0;
        out.manifest.blob_centers[dim + i] = 1.0;
      }
      for (std::size_t j = 0; j < n; ++j) {
        const std::size_t label = j % 2;
        const double* center = out.manifest.blob_centers.data() + label * dim;
        for (std::size_t i = 0; i < dim; ++i) {
          shard.features.push_back(center[i] + noise_sigma * rng.next_normal());
        }
        shard.targets.push_back(static_cast<double>(label));
      }
      break;
    }
  }
  return out;
}

std::vector<DataShard> split(const DataShard& data, const SplitSpec& spec) {
  const std::size_t total = data.sample_count();
  const std::size_t n = spec.n_parts;
  if (n == 0) throw ValidationError("split: n_parts must be >= 1");
  if (n == 1) return {data};
  if (!(spec.min_fraction > 0.0) || spec.min_fraction > 1.0 / static_cast<double>(n)) {
    throw ValidationError("split: min_fraction must be in (0, 1/n_parts]");
  }
  if (total < n) {
    throw ValidationError("split: fewer samples than parts");
  }
  const std::size_t min_count = static_cast<std::size_t>(
      std::ceil(spec.min_fraction * static_cast<double>(total)));
  if (min_count * n > total) {
    throw ValidationError("split: min_fraction infeasible for " +
                          std::to_string(total) + " samples");
  }

  // Dirichlet fractions, floored at min_fraction and renormalized.
  Rng64 rng(derive_seed(spec.seed, 0));
  std::vector<double> fractions(n);
  double mass = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    fractions[k] = gamma5(rng);
    mass += fractions[k];
  }
  for (double& f : fractions) f /= mass;
  std::vector<bool> floored(n, false);
  for (;;) {
    bool changed = false;
    double fixed_mass = 0.0;
    double free_mass = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      if (!floored[k] && fractions[k] < spec.min_fraction) {
        floored[k] = true;
        changed = true;
      }
      if (floored[k]) {
        fractions[k] = spec.min_fraction;
        fixed_mass += spec.min_fraction;
      } else {
        free_mass += fractions[k];
      }
    }
    if (!changed) break;
    if (free_mass > 0.0) {
      const double scale = (1.0 - fixed_mass) / free_mass;
      for (std::size_t k = 0; k < n; ++k) {
        if (!floored[k]) fractions[k] *= scale;
      }
    }
  }

  // Integer apportionment: floor counts, spread the remainder by largest
  // fractional part, then repair any shard still under the floor.
  std::vector<std::size_t> counts(n);
  std::vector<double> remainders(n);
  std::size_t assigned = 0;
  for (std::size_t k = 0; k < n; ++k) {
    const double exact = fractions[k] * static_cast<double>(total);
    counts[k] = static_cast<std::size_t>(std::floor(exact));
    remainders[k] = exact - std::floor(exact);
    assigned += counts[k];
  }
  std::vector<std::size_t> by_remainder(n);
  for (std::size_t k = 0; k < n; ++k) by_remainder[k] = k;
  std::sort(by_remainder.begin(), by_remainder.end(),
            [&](std::size_t a, std::size_t b) {
              if (remainders[a] != remainders[b]) {
                return remainders[a] > remainders[b];
              }
              return a < b;
            });
  for (std::size_t i = 0; assigned < total; ++i) {
    counts[by_remainder[i % n]] += 1;
    ++assigned;
  }
  for (;;) {
    std::size_t low = n, high = 0;
    for (std::size_t k = 0; k < n; ++k) {
      if (counts[k] < min_count && (low == n || counts[k] < counts[low])) {
        low = k;
      }
      if (counts[k] > counts[high]) high = k;
    }
    if (low == n) break;
    counts[high] -= 1;
    counts[low] += 1;
  }

  std::vector<std::size_t> order(total);
  for (std::size_t i = 0; i < total; ++i) order[i] = i;
  Rng64 shuffle_rng(derive_seed(spec.seed, 1));
  fisher_yates(order, shuffle_rng);

  std::vector<DataShard> shards;
  shards.reserve(n);
  std::size_t offset = 0;
  for (std::size_t k = 0; k < n; ++k) {
    std::vector<std::size_t> rows(order.begin() + offset,
                                  order.begin() + offset + counts[k]);
    offset += counts[k];
    shards.push_back(take_rows(data, rows));
  }
  return shards;
}

std::pair<DataShard, DataShard> holdout_split(const DataShard& data,
                                              double test_fraction,
                                              std::uint64_t seed) {
  if (!(test_fraction >= 0.0 && test_fraction < 1.0)) {
    throw ValidationError("holdout_split: test_fraction must be in [0, 1)");
  }
  const std::size_t total = data.sample_count();
  const std::size_t test_count = static_cast<std::size_t>(
      std::floor(test_fraction * static_cast<double>(total) + 0.5));
  std::vector<std::size_t> order(total);
  for (std::size_t i = 0; i < total; ++i) order[i] = i;
  Rng64 rng(seed);
  fisher_yates(order, rng);
  std::vector<std::size_t> test_rows(order.begin(), order.begin() + test_count);
  std::vector<std::size_t> train_rows(order.begin() + test_count, order.end());
  return {take_rows(data, train_rows), take_rows(data, test_rows)};
}

DataShard load_csv(const std::string& path, const CsvSchema& schema) {
  if (schema.feature_cols == 0) {
    throw ValidationError("load_csv: feature_cols must be >= 1");
  }
  std::ifstream in(path);
  if (!in) throw ParseError(path + ": cannot open file");
  DataShard shard;
  shard.feature_dim = schema.feature_cols;
  shard.target_dim = schema.target_cols;
  const std::size_t want = schema.feature_cols + schema.target_cols;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line_no == 1 && schema.has_header) continue;
    if (line.empty()) continue;
    std::stringstream row(line);
    std::string cell;
    std::size_t col = 0;
    while (std::getline(row, cell, ',')) {
      if (col >= want) break;
      const char* begin = cell.c_str();
      char* end = nullptr;
      const double v = std::strtod(begin, &end);
      while (end && *end == ' ') ++end;
      if (end == begin || (end && *end != '\0')) {
        throw ParseError(path + ": malformed value '" + cell + "' at line " +
                         std::to_string(line_no));
      }
      check_finite_cell(v, line_no, path);
      if (col < schema.feature_cols) {
        shard.features.push_back(v);
      } else {
        shard.targets.push_back(v);
      }
      ++col;
    }
    if (col != want) {
      throw ParseError(path + ": expected " + std::to_string(want) +
                       " columns, got " + std::to_string(col) + " at line " +
                       std::to_string(line_no));
    }
  }
  if (shard.sample_count() == 0) {
    throw ParseError(path + ": no data rows");
  }
  return shard;
}

void save_csv(const std::string& path, const DataShard& shard) {
  std::ofstream out(path);
  if (!out) throw ValidationError("save_csv: cannot open " + path);
  char buf[64];
  for (std::size_t j = 0; j < shard.sample_count(); ++j) {
    for (std::size_t i = 0; i < shard.feature_dim; ++i) {
      std::snprintf(buf, sizeof buf, "%.17g", shard.feature_row(j)[i]);
      out << (i == 0 ? "" : ",") << buf;
    }
    for (std::size_t t = 0; t < shard.target_dim; ++t) {
      std::snprintf(buf, sizeof buf, "%.17g", shard.target_row(j)[t]);
      out << ',' << buf;
    }
    out << '\n';
  }
}

}  // namespace fedf
