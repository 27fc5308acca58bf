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

#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "dlpim/types.hpp"

namespace dlpim {

struct Coord {
  uint32_t row = 0;
  uint32_t col = 0;

  bool operator==(const Coord&) const = default;
};

// Vault placement on a rectangular grid. Grid positions without a vault act
// as pass-through routers: they forward packets at normal hop cost but have
// no memory, no core and no service queue. Immutable after construction.
class Topology {
 public:
  // "hmc6x6": 6x6 grid, 32 vaults (the four corners are pass-through).
  // "hbm4x2": 4x2 grid, 8 channels, fully populated.
  static Topology preset(std::string_view name);
  static Topology custom(uint32_t rows, uint32_t cols,
                         std::vector<Coord> vaults);

  uint32_t grid_rows() const { return rows_; }
  uint32_t grid_cols() const { return cols_; }
  uint32_t vault_count() const { return static_cast<uint32_t>(vaults_.size()); }
  const std::string& name() const { return name_; }

  Coord coord(VaultId v) const;
  std::optional<VaultId> vault_at(Coord c) const;

  uint32_t manhattan(VaultId a, VaultId b) const;
  uint32_t max_pairwise_distance() const;

  // Dimension-ordered path, column moves first then row. The returned grid
  // positions include both endpoints; length-1 for a == b. Every consecutive
  // pair is grid-adjacent and the hop count equals manhattan(a, b).
  std::vector<Coord> route(VaultId a, VaultId b) const;

  // Vault minimizing the total Manhattan distance to all vaults, lowest id
  // on ties. Used as the aggregation point for global policy decisions.
  VaultId central_vault() const { return central_; }

 private:
  Topology(std::string name, uint32_t rows, uint32_t cols,
           std::vector<Coord> vaults);

  void check_vault(VaultId v) const;

  std::string name_;
  uint32_t rows_ = 0;
  uint32_t cols_ = 0;
  std::vector<Coord> vaults_;            // by vault id
  std::vector<int32_t> vault_at_node_;   // grid node -> vault id or -1
  VaultId central_ = 0;
};

}  // namespace dlpim
