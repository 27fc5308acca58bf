/*
 * Copyright 2026 dlpim contributors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "dlpim/topology.hpp"

#include <algorithm>
#include <cstdlib>
#include <set>

namespace dlpim {

namespace {

uint32_t abs_diff(uint32_t a, uint32_t b) { return a > b ? a - b : b - a; }

}  // namespace

Topology::Topology(std::string name, uint32_t rows, uint32_t cols,
                   std::vector<Coord> vaults)
    : name_(std::move(name)), rows_(rows), cols_(cols),
      vaults_(std::move(vaults)) {
  if (rows_ == 0 || cols_ == 0) throw ConfigError("topology: grid must be non-empty");
  if (vaults_.empty()) throw ConfigError("topology: at least one vault required");
  if (vaults_.size() > static_cast<size_t>(rows_) * cols_)
    throw ConfigError("topology: more vaults than grid positions");

  vault_at_node_.assign(static_cast<size_t>(rows_) * cols_, -1);
  for (size_t v = 0; v < vaults_.size(); ++v) {
    const Coord c = vaults_[v];
    if (c.row >= rows_ || c.col >= cols_)
      throw ConfigError("topology: vault coordinate outside grid");
    int32_t& slot = vault_at_node_[static_cast<size_t>(c.row) * cols_ + c.col];
    if (slot != -1) throw ConfigError("topology: duplicate vault coordinate");
    slot = static_cast<int32_t>(v);
  }

  // Central vault by brute force; lowest id wins ties.
  uint64_t best_sum = UINT64_MAX;
  for (VaultId v = 0; v < vault_count(); ++v) {
    uint64_t sum = 0;
    for (VaultId w = 0; w < vault_count(); ++w) sum += manhattan(v, w);
    if (sum < best_sum) {
      best_sum = sum;
      central_ = v;
    }
  }
}

Topology Topology::preset(std::string_view name) {
  if (name == "hmc6x6") {
    // 32 vaults on a 6x6 grid: all positions except the four corners. The
    // corner choice is a layout convention; use custom() for other shapes.
    std::vector<Coord> vaults;
    for (uint32_t r = 0; r < 6; ++r) {
      for (uint32_t c = 0; c < 6; ++c) {
        const bool corner = (r == 0 || r == 5) && (c == 0 || c == 5);
        if (!corner) vaults.push_back({r, c});
      }
    }
    return Topology("hmc6x6", 6, 6, std::move(vaults));
  }
  if (name == "hbm4x2") {
    std::vector<Coord> vaults;
    for (uint32_t r = 0; r < 4; ++r)
      for (uint32_t c = 0; c < 2; ++c) vaults.push_back({r, c});
    return Topology("hbm4x2", 4, 2, std::move(vaults));
  }
  throw ConfigError("unknown topology preset '" + std::string(name) + "'");
}

Topology Topology::custom(uint32_t rows, uint32_t cols,
                          std::vector<Coord> vaults) {
  return Topology("custom", rows, cols, std::move(vaults));
}

void Topology::check_vault(VaultId v) const {
  if (v >= vault_count())
    throw ConfigError("invalid vault id " + std::to_string(v));
}

Coord Topology::coord(VaultId v) const {
  check_vault(v);
  return vaults_[v];
}

std::optional<VaultId> Topology::vault_at(Coord c) const {
  if (c.row >= rows_ || c.col >= cols_) return std::nullopt;
  const int32_t v = vault_at_node_[static_cast<size_t>(c.row) * cols_ + c.col];
  if (v < 0) return std::nullopt;
  return static_cast<VaultId>(v);
}

uint32_t Topology::manhattan(VaultId a, VaultId b) const {
  check_vault(a);
  check_vault(b);
  const Coord ca = vaults_[a];
  const Coord cb = vaults_[b];
  return abs_diff(ca.row, cb.row) + abs_diff(ca.col, cb.col);
}

uint32_t Topology::max_pairwise_distance() const {
  uint32_t best = 0;
  for (VaultId a = 0; a < vault_count(); ++a)
    for (VaultId b = 0; b < vault_count(); ++b)
      best = std::max(best, manhattan(a, b));
  return best;
}

std::vector<Coord> Topology::route(VaultId a, VaultId b) const {
  check_vault(a);
  check_vault(b);
  std::vector<Coord> path;
  Coord cur = vaults_[a];
  const Coord dst = vaults_[b];
  path.push_back(cur);
  while (cur.col != dst.col) {
    cur.col += cur.col < dst.col ? 1 : -1;
    path.push_back(cur);
  }
  while (cur.row != dst.row) {
    cur.row += cur.row < dst.row ? 1 : -1;
    path.push_back(cur);
  }
  return path;
}

}  // namespace dlpim
