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

#include <deque>
#include <unordered_map>
#include <vector>

#include "dlpim/adaptive.hpp"
#include "dlpim/subscription_table.hpp"
#include "dlpim/types.hpp"

namespace dlpim {

// Block payloads are modeled as 64-bit values folded from the sequence of
// writes they commit, which is enough to catch lost, duplicated or misrouted
// writes without storing real bytes.
inline uint64_t initial_payload(BlockAddr addr) {
  uint64_t x = addr + 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

inline uint64_t apply_write(uint64_t payload, uint64_t write_id) {
  // Order-sensitive fold: rotate then mix in the write identity.
  const uint64_t rotated = (payload << 7) | (payload >> 57);
  return (rotated ^ write_id) * 0xFF51AFD7ED558CCDull;
}

// One reserved-space slot. Slot i backs subscription-table entry i.
struct ReservedSlot {
  bool valid = false;
  bool dirty = false;
  uint64_t payload = 0;
  BlockAddr orig_addr = 0;
};

// A packet waiting for vault service (or a core request parked until a
// pending protocol transition on its address settles).
struct ServiceItem {
  Packet pkt;
  Cycle arrival = 0;
};

// Local/remote reuse counters for one subscription tenure at its holder.
struct ReuseTenure {
  uint64_t local = 0;
  uint64_t remote = 0;
};

// Per-vault controller state: the authoritative home image, the reserved
// subscription space, the subscription table and buffer, the service queue
// and the adaptive-policy registers. All mutation happens inside the engine's
// cycle loop.
struct VaultState {
  VaultState(VaultId id_, uint32_t sets, uint32_t ways, uint32_t block_bytes,
             uint32_t vault_count, uint32_t buffer_entries)
      : id(id_), table(sets, ways, block_bytes, vault_count),
        buffer(buffer_entries) {
    slots.resize(static_cast<size_t>(sets) * ways);
  }

  VaultId id;
  SubscriptionTable table;
  SubscriptionBuffer buffer;
  std::vector<ReservedSlot> slots;

  // Home blocks this vault has ever served; absent means untouched (payload
  // defaults to initial_payload).
  std::unordered_map<BlockAddr, uint64_t> home;

  std::deque<ServiceItem> service_queue;
  uint64_t max_service_occupancy = 0;
  bool served_this_cycle = false;

  // Core requests waiting for a pending transition on their address.
  std::unordered_map<BlockAddr, std::deque<ServiceItem>> parked;
  uint64_t parked_count = 0;

  PolicyRegisters registers;
  bool subscribe_on = false;  // policy for normal sets
  double prev_avg = 0.0;      // local-decision mode only
  bool prev_avg_valid = false;

  std::unordered_map<uint32_t, ReuseTenure> tenures;  // by table entry index

  uint64_t home_payload(BlockAddr addr) const {
    const auto it = home.find(addr);
    return it == home.end() ? initial_payload(addr) : it->second;
  }

  void enqueue_service(Packet pkt, Cycle now) {
    service_queue.push_back({std::move(pkt), now});
    if (service_queue.size() > max_service_occupancy)
      max_service_occupancy = service_queue.size();
  }

  void park(Packet pkt, Cycle now) {
    parked[pkt.addr].push_back({std::move(pkt), now});
    ++parked_count;
  }
};

}  // namespace dlpim
