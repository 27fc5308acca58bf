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

#include <doctest.h>

#include "dlpim/topology.hpp"

using namespace dlpim;

namespace {

uint32_t coord_manhattan(Coord a, Coord b) {
  const auto d = [](uint32_t x, uint32_t y) { return x > y ? x - y : y - x; };
  return d(a.row, b.row) + d(a.col, b.col);
}

}  // namespace

TEST_CASE("presets have the expected shapes") {
  const Topology hmc = Topology::preset("hmc6x6");
  CHECK(hmc.grid_rows() == 6);
  CHECK(hmc.grid_cols() == 6);
  CHECK(hmc.vault_count() == 32);
  // Corners are pass-through positions.
  CHECK(!hmc.vault_at({0, 0}).has_value());
  CHECK(!hmc.vault_at({0, 5}).has_value());
  CHECK(!hmc.vault_at({5, 0}).has_value());
  CHECK(!hmc.vault_at({5, 5}).has_value());

  const Topology hbm = Topology::preset("hbm4x2");
  CHECK(hbm.grid_rows() == 4);
  CHECK(hbm.grid_cols() == 2);
  CHECK(hbm.vault_count() == 8);

  CHECK_THROWS_AS(Topology::preset("nope"), ConfigError);
}

TEST_CASE("manhattan distance basics") {
  const Topology t = Topology::custom(3, 4, {{0, 0}, {2, 3}, {1, 2}});
  CHECK(t.manhattan(0, 1) == 5);
  CHECK(t.manhattan(1, 1) == 0);
  CHECK_THROWS_AS(t.manhattan(0, 9), ConfigError);
}

TEST_CASE("manhattan is a metric on every preset") {
  for (const char* name : {"hmc6x6", "hbm4x2"}) {
    const Topology t = Topology::preset(name);
    const uint32_t n = t.vault_count();
    for (VaultId a = 0; a < n; ++a) {
      for (VaultId b = 0; b < n; ++b) {
        CHECK(t.manhattan(a, b) == t.manhattan(b, a));
        CHECK((t.manhattan(a, b) == 0) == (a == b));
        for (VaultId c = 0; c < n; ++c)
          CHECK(t.manhattan(a, c) <= t.manhattan(a, b) + t.manhattan(b, c));
      }
    }
  }
}

TEST_CASE("hbm4x2 max pairwise distance, by brute force") {
  const Topology t = Topology::preset("hbm4x2");
  uint32_t best = 0;
  for (VaultId a = 0; a < 8; ++a)
    for (VaultId b = 0; b < 8; ++b)
      best = std::max(best, coord_manhattan(t.coord(a), t.coord(b)));
  CHECK(best == 4);
  CHECK(t.max_pairwise_distance() == 4);
}

TEST_CASE("routes are column-first and as long as the distance") {
  const Topology t = Topology::preset("hmc6x6");
  const VaultId a = *t.vault_at({0, 1});
  const VaultId b = *t.vault_at({1, 3});
  const auto path = t.route(a, b);
  REQUIRE(path.size() == 4);  // 3 hops
  CHECK(path[0] == Coord{0, 1});
  CHECK(path[1] == Coord{0, 2});  // column moves first
  CHECK(path[2] == Coord{0, 3});
  CHECK(path[3] == Coord{1, 3});

  CHECK(t.route(a, a).size() == 1);

  for (const char* name : {"hmc6x6", "hbm4x2"}) {
    const Topology topo = Topology::preset(name);
    for (VaultId x = 0; x < topo.vault_count(); ++x) {
      for (VaultId y = 0; y < topo.vault_count(); ++y) {
        const auto p = topo.route(x, y);
        CHECK(p.size() == topo.manhattan(x, y) + 1);
        for (size_t i = 1; i < p.size(); ++i)
          CHECK(coord_manhattan(p[i - 1], p[i]) == 1);
      }
    }
  }
}

TEST_CASE("central vault minimizes total distance, lowest id on ties") {
  SUBCASE("single vault") {
    const Topology t = Topology::custom(1, 1, {{0, 0}});
    CHECK(t.central_vault() == 0);
  }
  for (const char* name : {"hmc6x6", "hbm4x2"}) {
    const Topology t = Topology::preset(name);
    uint64_t best_sum = UINT64_MAX;
    VaultId best = 0;
    for (VaultId v = 0; v < t.vault_count(); ++v) {
      uint64_t sum = 0;
      for (VaultId w = 0; w < t.vault_count(); ++w) sum += t.manhattan(v, w);
      if (sum < best_sum) {
        best_sum = sum;
        best = v;
      }
    }
    CHECK(t.central_vault() == best);
    uint64_t central_sum = 0;
    for (VaultId w = 0; w < t.vault_count(); ++w)
      central_sum += t.manhattan(t.central_vault(), w);
    CHECK(central_sum == best_sum);
  }
  SUBCASE("hbm central is one of the four inner positions") {
    const Topology t = Topology::preset("hbm4x2");
    const Coord c = t.coord(t.central_vault());
    CHECK((c.row == 1 || c.row == 2));
  }
}

TEST_CASE("custom topology validation") {
  CHECK_THROWS_AS(Topology::custom(2, 2, {{0, 0}, {0, 0}}), ConfigError);
  CHECK_THROWS_AS(Topology::custom(2, 2, {{2, 0}}), ConfigError);
  CHECK_THROWS_AS(Topology::custom(1, 1, {{0, 0}, {0, 1}}), ConfigError);
}
