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

#include <set>
#include <unordered_map>

#include "dlpim/engine.hpp"

namespace dlpim::test {

// Small-table config with everything instrumented, suitable for protocol
// micro-tests.
inline SimConfig micro_config(const std::string& preset = "hbm4x2") {
  SimConfig cfg;
  cfg.preset = preset;
  cfg.warmup_requests = 0;
  cfg.policy = PolicyKind::AlwaysOn;
  cfg.request_log = true;
  cfg.commit_log = true;
  cfg.audit_enabled = true;
  return cfg;
}

inline TraceRecord rec(uint64_t delta, uint32_t core, Op op, uint64_t block,
                       uint32_t block_bytes = 64) {
  return {delta, core, op, block * block_bytes};
}

inline VaultId home_of(const SimConfig& cfg, const Topology& topo, BlockAddr addr) {
  return static_cast<VaultId>((addr / cfg.block_bytes) % topo.vault_count());
}

// Flat-memory replay of the commit log. Each block's final payload must
// match the simulator's authoritative copy, and every issued write must have
// committed exactly once.
inline void check_memory_oracle(const Simulator& sim, const SimConfig& cfg) {
  std::unordered_map<BlockAddr, uint64_t> flat;
  std::set<uint64_t> seen_writes;
  for (const CommitRecord& c : sim.commit_log()) {
    auto [it, inserted] = flat.try_emplace(c.addr, initial_payload(c.addr));
    it->second = apply_write(it->second, c.write_id);
    REQUIRE(seen_writes.insert(c.write_id).second);  // committed once
  }
  // Every completed write shows up in the commit log.
  for (const RequestRecord& r : sim.request_log()) {
    if (r.op == Op::Write) REQUIRE(seen_writes.count(r.id) == 1);
  }
  // Authoritative copies match the replay.
  const Topology& topo = sim.topology();
  for (const auto& [addr, expected] : flat) {
    const VaultId home = home_of(cfg, topo, addr);
    const VaultState& hv = sim.vault(home);
    const SubEntry* e = hv.table.find(addr);
    uint64_t actual;
    if (e != nullptr && e->state == SubState::Subscribed) {
      const VaultState& holder = sim.vault(e->current_vault);
      const SubEntry* twin = holder.table.find(addr);
      REQUIRE(twin != nullptr);
      actual = holder.slots[twin->slot].payload;
    } else {
      REQUIRE((e == nullptr || e->state == SubState::Unsubscribed));
      actual = hv.home_payload(addr);
    }
    REQUIRE(actual == expected);
  }
}

inline void check_no_pending(const Simulator& sim) {
  const Topology& topo = sim.topology();
  for (VaultId v = 0; v < topo.vault_count(); ++v) {
    const VaultState& vs = sim.vault(v);
    REQUIRE(vs.parked_count == 0);
    REQUIRE(vs.buffer.empty());
    for (uint32_t i = 0; i < vs.table.entry_count(); ++i) {
      const SubEntry& e = vs.table.entry(i);
      if (!e.valid) continue;
      REQUIRE((e.state == SubState::Unsubscribed || e.state == SubState::Subscribed));
    }
  }
}

}  // namespace dlpim::test
