// Copyright 2026 The hsid Authors
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

// On-disk layout of a HierarchicalGrid store, all little-endian:
//
//   "HSIG"            4 bytes magic
//   version           u32 (currently 1)
//   d, m              u32 each
//   base_cell, eta    f64 each
//   records until EOF:
//     key             d x i64, index on the finest (level R) lattice
//     value           m x f64
//     jacobian        m*d x f64, column-major
//
// Doubles are written bit-for-bit so a round trip is exact.

#include <algorithm>
#include <array>
#include <bit>
#include <cstring>
#include <istream>
#include <mutex>
#include <ostream>

#include "hsid/error.h"
#include "hsid/hierarchical_grid.h"

namespace hsid {
namespace {

constexpr std::array<char, 4> kMagic = {'H', 'S', 'I', 'G'};
constexpr std::uint32_t kVersion = 1;

template <typename T>
void PutLE(std::ostream& out, T v) {
  std::array<char, sizeof(T)> bytes;
  std::memcpy(bytes.data(), &v, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes.begin(), bytes.end());
  out.write(bytes.data(), bytes.size());
}

template <typename T>
bool GetLE(std::istream& in, T* v) {
  std::array<char, sizeof(T)> bytes;
  if (!in.read(bytes.data(), bytes.size())) return false;
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes.begin(), bytes.end());
  std::memcpy(v, bytes.data(), sizeof(T));
  return true;
}

int CoarsestLevel(const std::vector<std::int64_t>& key, int max_level) {
  int level = max_level;
  while (level > 0 &&
         std::all_of(key.begin(), key.end(), [&](std::int64_t k) {
           return k % (std::int64_t{1} << (max_level - level + 1)) == 0;
         })) {
    --level;
  }
  return level;
}

}  // namespace

void HierarchicalGrid::Save(std::ostream& out) const {
  std::shared_lock lock(mu_);
  out.write(kMagic.data(), kMagic.size());
  PutLE<std::uint32_t>(out, kVersion);
  PutLE<std::uint32_t>(out, static_cast<std::uint32_t>(dim_));
  PutLE<std::uint32_t>(out, static_cast<std::uint32_t>(out_dim_));
  PutLE<double>(out, base_cell_);
  PutLE<double>(out, threshold_);
  for (const auto& [key, entry] : store_) {
    for (std::int64_t k : key) PutLE<std::int64_t>(out, k);
    const CornerSample& s = *entry.sample;
    for (Eigen::Index i = 0; i < s.value.size(); ++i) PutLE<double>(out, s.value[i]);
    for (Eigen::Index i = 0; i < s.jacobian.size(); ++i) PutLE<double>(out, s.jacobian.data()[i]);
  }
  if (!out) throw Error("grid: write failed");
}

std::unique_ptr<HierarchicalGrid> HierarchicalGrid::Load(
    std::istream& in, std::shared_ptr<const ExpensiveMap> map) {
  std::array<char, 4> magic;
  if (!in.read(magic.data(), magic.size()) || magic != kMagic) {
    throw InvalidInputError("grid: bad magic, not an HSIG file");
  }
  std::uint32_t version = 0, d = 0, m = 0;
  double base_cell = 0, threshold = 0;
  if (!GetLE(in, &version) || !GetLE(in, &d) || !GetLE(in, &m) ||
      !GetLE(in, &base_cell) || !GetLE(in, &threshold)) {
    throw InvalidInputError("grid: truncated header");
  }
  if (version != kVersion) throw InvalidInputError("grid: unsupported version");
  if (!map || map->input_dim() != static_cast<int>(d) ||
      map->output_dim() != static_cast<int>(m)) {
    throw InvalidInputError("grid: file dimensions do not match backing map");
  }
  auto grid = std::make_unique<HierarchicalGrid>(std::move(map), base_cell, threshold);
  while (true) {
    Key key(d);
    std::int64_t first;
    if (!GetLE(in, &first)) break;
    key[0] = first;
    for (std::uint32_t k = 1; k < d; ++k) {
      if (!GetLE(in, &key[k])) throw InvalidInputError("grid: truncated record");
    }
    auto sample = std::make_shared<CornerSample>();
    sample->position = grid->KeyPosition(key);
    sample->value.resize(m);
    sample->jacobian.resize(m, d);
    for (std::uint32_t i = 0; i < m; ++i) {
      if (!GetLE(in, &sample->value[i])) throw InvalidInputError("grid: truncated record");
    }
    for (std::uint32_t i = 0; i < m * d; ++i) {
      if (!GetLE(in, &sample->jacobian.data()[i])) throw InvalidInputError("grid: truncated record");
    }
    grid->Insert(key, std::move(sample), CoarsestLevel(key, grid->max_level_));
  }
  return grid;
}

}  // namespace hsid
