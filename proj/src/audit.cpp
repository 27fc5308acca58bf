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

// Consistency audit over the distributed subscription state. Runs at epoch
// boundaries and at drain; any violation is a protocol bug, not a workload
// property, so it throws.

#include <string>
#include <unordered_map>
#include <unordered_set>

#include "dlpim/engine.hpp"

namespace dlpim {

namespace {

struct AddrFacts {
  bool home_live = false;      // home-side entry in any non-released state
  bool any_pending = false;
  uint32_t reachable_slots = 0;  // holder-side Subscribed copies
};

[[noreturn]] void fail(const std::string& what) { throw SimError("audit: " + what); }

}  // namespace

void Simulator::audit_or_throw() const {
  ++audits_run_;
  std::unordered_map<BlockAddr, AddrFacts> facts;
  uint64_t pending_recount = 0;

  for (VaultId vid = 0; vid < topo_.vault_count(); ++vid) {
    const VaultState& v = *vaults_[vid];
    if (v.buffer.size() > cfg_.buffer_entries)
      fail("subscription buffer overflow at vault " + std::to_string(vid));

    for (uint32_t set = 0; set < v.table.sets(); ++set) {
      if (v.table.live_count(set) > v.table.ways())
        fail("set overflow at vault " + std::to_string(vid));
    }

    for (uint32_t i = 0; i < v.table.entry_count(); ++i) {
      const SubEntry& e = v.table.entry(i);
      const ReservedSlot& slot = v.slots[i];
      if (!e.valid) {
        if (slot.valid) fail("orphaned reserved slot at vault " + std::to_string(vid));
        continue;
      }
      if (is_pending(e.state)) ++pending_recount;
      AddrFacts& f = facts[e.addr];
      if (is_pending(e.state)) f.any_pending = true;

      const bool home_side = home_vault(e.addr) == vid;
      if (home_side) {
        if (e.state != SubState::Unsubscribed) f.home_live = true;
        if (slot.valid) fail("home-side entry must not own a reserved slot");
        if (e.current_vault == vid)
          fail("home-side entry points at its own vault");
        // Pairing: a Subscribed home entry must have a holder-side twin in a
        // holding state.
        if (e.state == SubState::Subscribed) {
          const VaultState& h = *vaults_[e.current_vault];
          const SubEntry* twin = h.table.find(e.addr);
          if (twin == nullptr)
            fail("subscribed block 0x" + std::to_string(e.addr) + " has no holder entry");
          if (twin->state != SubState::Subscribed &&
              twin->state != SubState::PendingResubscription &&
              twin->state != SubState::PendingUnsubscription)
            fail("holder entry in non-holding state " + std::string(to_string(twin->state)));
          if (twin->state != SubState::PendingResubscription &&
              !h.slots[twin->slot].valid)
            fail("holder entry without valid reserved data");
        }
      } else {
        // Holder side: the reserved slot mirrors the entry state.
        const bool holding = e.state == SubState::Subscribed ||
                             e.state == SubState::PendingResubscription ||
                             e.state == SubState::PendingUnsubscription;
        if (holding != slot.valid)
          fail("slot validity out of sync with state " + std::string(to_string(e.state)));
        if (slot.dirty && !slot.valid) fail("dirty bit on an invalid slot");
        if (slot.valid && slot.orig_addr != e.addr)
          fail("reserved slot holds a different block");
        if (e.state == SubState::Subscribed) {
          f.reachable_slots += 1;
          const SubEntry* twin = vaults_[home_vault(e.addr)]->table.find(e.addr);
          // Mid-resubscription the home still points at the old holder while
          // this vault already committed; its ack repoints the mapping.
          const bool repointing = twin != nullptr &&
                                  twin->state == SubState::PendingResubscription &&
                                  twin->resub_target == vid;
          if (twin == nullptr || (twin->current_vault != vid && !repointing))
            fail("holder entry without a matching home mapping");
        }
      }
    }
  }

  if (pending_recount != pending_entries_)
    fail("pending-entry counter drifted");

  // Packets still moving blocks around mark their addresses as in
  // transition.
  net_.for_each_packet([&](const Packet& p) {
    switch (p.kind) {
      case RequestKind::SubscriptionRequest:
      case RequestKind::SubscriptionNack:
      case RequestKind::SubscriptionDataTransfer:
      case RequestKind::SubscriptionTransferAck:
      case RequestKind::UnsubscriptionRequest:
      case RequestKind::UnsubscriptionTransferAck:
        facts[p.addr].any_pending = true;
        break;
      default:
        break;
    }
  });

  // Single authoritative copy: at most one readable location always, exactly
  // one once no transition is in flight for the block.
  for (const auto& [addr, f] : facts) {
    const uint32_t reachable = (f.home_live ? 0 : 1) + f.reachable_slots;
    if (reachable > 1)
      fail("block 0x" + std::to_string(addr) + " readable in " +
           std::to_string(reachable) + " places");
    if (!f.any_pending && reachable != 1)
      fail("settled block 0x" + std::to_string(addr) + " readable in " +
           std::to_string(reachable) + " places");
  }

  // After broadcasts drain, every vault must agree on the normal-set policy.
  if (cfg_.global_decisions) {
    bool broadcast_in_flight = false;
    net_.for_each_packet([&](const Packet& p) {
      if (p.kind == RequestKind::TurnOnSubscription ||
          p.kind == RequestKind::TurnOffSubscription)
        broadcast_in_flight = true;
    });
    if (!broadcast_in_flight) {
      for (const auto& v : vaults_) {
        if (v->subscribe_on != vaults_[0]->subscribe_on)
          fail("vaults disagree on the subscription policy");
      }
    }
  }
}

}  // namespace dlpim
