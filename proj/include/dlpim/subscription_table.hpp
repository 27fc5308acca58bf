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

#include <cstddef>
#include <optional>
#include <vector>

#include "dlpim/types.hpp"

namespace dlpim {

enum class SubState : uint8_t {
  Unsubscribed,
  PendingSubscription,
  Subscribed,
  PendingResubscription,
  PendingUnsubscription,
};

const char* to_string(SubState s);

// One subscription-table record. The same table holds both roles: at the
// block's home vault the entry tracks where the block went (current_vault);
// at the holding vault it tracks which reserved-space slot stores the remote
// block. The role is derived from whether the owning vault is the block's
// home.
struct SubEntry {
  BlockAddr addr = 0;
  VaultId current_vault = kNoVault;  // holder (home side) / self (holder side)
  uint32_t slot = 0;                 // reserved-space index == entry index
  SubState state = SubState::Unsubscribed;
  uint8_t freq = 0;                  // saturating LFU counter, halved per epoch
  Cycle last_touch = 0;              // LRU tie-break
  bool valid = false;                // entry allocated
  // While a resubscription is redirecting this block, the vault the data is
  // moving to.
  VaultId resub_target = kNoVault;

  bool live() const { return valid && state != SubState::Unsubscribed; }

  void touch(Cycle now) {
    if (freq < 255) ++freq;
    last_touch = now;
  }
};

// 4-way set-associative lookup table (geometry configurable). The set index
// is taken from the block bits above the vault-interleaving bits so it does
// not alias with the home vault id.
class SubscriptionTable {
 public:
  SubscriptionTable(uint32_t sets, uint32_t ways, uint32_t block_bytes,
                    uint32_t vault_count);

  uint32_t sets() const { return sets_; }
  uint32_t ways() const { return ways_; }
  uint32_t set_of(BlockAddr addr) const;

  SubEntry* find(BlockAddr addr);
  const SubEntry* find(BlockAddr addr) const;

  // Allocates a free way in addr's set, or nullptr when the set is full of
  // live entries. The returned entry is valid with state Unsubscribed.
  SubEntry* allocate(BlockAddr addr, Cycle now);

  void release(SubEntry& e);

  // LFU victim (lowest freq, oldest last_touch on ties) among Subscribed
  // entries of the set; pending entries are never victims.
  SubEntry* pick_victim(uint32_t set);

  uint32_t live_count(uint32_t set) const;
  // True if any entry of the set is mid-unsubscription/resubscription, i.e. a
  // way is already on its way to becoming free.
  bool eviction_in_progress(uint32_t set) const;

  void halve_freqs();

  uint32_t entry_index(const SubEntry& e) const;
  SubEntry& entry(uint32_t index) { return entries_[index]; }
  const SubEntry& entry(uint32_t index) const { return entries_[index]; }
  uint32_t entry_count() const { return sets_ * ways_; }

 private:
  uint32_t sets_;
  uint32_t ways_;
  uint32_t block_bytes_;
  uint32_t vault_count_;
  std::vector<SubEntry> entries_;
};

// Staging store for subscription requests that are waiting for table space.
// An entry is processable ("valid" in hardware terms) once its target set has
// a free way; the per-cycle scan handles at most one entry per vault.
struct SubBufferEntry {
  VaultId from_vault = kNoVault;  // subscribing vault
  VaultId to_vault = kNoVault;    // block's home vault
  BlockAddr addr = 0;
  Cycle enqueued = 0;
  // True when buffered at the block's home while handling a remote request;
  // false when buffered at the requester before the request was sent.
  bool at_original = false;
};

class SubscriptionBuffer {
 public:
  explicit SubscriptionBuffer(uint32_t capacity) : capacity_(capacity) {}

  bool full() const { return entries_.size() >= capacity_; }
  size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }

  bool push(SubBufferEntry e);
  bool contains(BlockAddr addr) const;
  void drop(BlockAddr addr);

  // Oldest entry first.
  const std::vector<SubBufferEntry>& entries() const { return entries_; }
  SubBufferEntry take(size_t index);

 private:
  uint32_t capacity_;
  std::vector<SubBufferEntry> entries_;
};

}  // namespace dlpim
