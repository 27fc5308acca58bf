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

#include "dlpim/subscription_table.hpp"

#include <algorithm>

namespace dlpim {

const char* to_string(SubState s) {
  switch (s) {
    case SubState::Unsubscribed: return "Unsubscribed";
    case SubState::PendingSubscription: return "PendingSubscription";
    case SubState::Subscribed: return "Subscribed";
    case SubState::PendingResubscription: return "PendingResubscription";
    case SubState::PendingUnsubscription: return "PendingUnsubscription";
  }
  return "?";
}

SubscriptionTable::SubscriptionTable(uint32_t sets, uint32_t ways,
                                     uint32_t block_bytes, uint32_t vault_count)
    : sets_(sets), ways_(ways), block_bytes_(block_bytes),
      vault_count_(vault_count) {
  entries_.resize(static_cast<size_t>(sets_) * ways_);
  for (uint32_t i = 0; i < entries_.size(); ++i) entries_[i].slot = i;
}

uint32_t SubscriptionTable::set_of(BlockAddr addr) const {
  const uint64_t block = addr / block_bytes_;
  return static_cast<uint32_t>((block / vault_count_) % sets_);
}

SubEntry* SubscriptionTable::find(BlockAddr addr) {
  const uint32_t set = set_of(addr);
  for (uint32_t w = 0; w < ways_; ++w) {
    SubEntry& e = entries_[static_cast<size_t>(set) * ways_ + w];
    if (e.valid && e.addr == addr) return &e;
  }
  return nullptr;
}

const SubEntry* SubscriptionTable::find(BlockAddr addr) const {
  return const_cast<SubscriptionTable*>(this)->find(addr);
}

SubEntry* SubscriptionTable::allocate(BlockAddr addr, Cycle now) {
  const uint32_t set = set_of(addr);
  for (uint32_t w = 0; w < ways_; ++w) {
    SubEntry& e = entries_[static_cast<size_t>(set) * ways_ + w];
    if (!e.live()) {
      const uint32_t slot = e.slot;
      e = SubEntry{};
      e.slot = slot;
      e.addr = addr;
      e.valid = true;
      e.freq = 1;
      e.last_touch = now;
      return &e;
    }
  }
  return nullptr;
}

void SubscriptionTable::release(SubEntry& e) {
  const uint32_t slot = e.slot;
  e = SubEntry{};
  e.slot = slot;
}

SubEntry* SubscriptionTable::pick_victim(uint32_t set) {
  SubEntry* victim = nullptr;
  for (uint32_t w = 0; w < ways_; ++w) {
    SubEntry& e = entries_[static_cast<size_t>(set) * ways_ + w];
    if (!e.valid || e.state != SubState::Subscribed) continue;
    if (!victim || e.freq < victim->freq ||
        (e.freq == victim->freq && e.last_touch < victim->last_touch)) {
      victim = &e;
    }
  }
  return victim;
}

uint32_t SubscriptionTable::live_count(uint32_t set) const {
  uint32_t n = 0;
  for (uint32_t w = 0; w < ways_; ++w)
    if (entries_[static_cast<size_t>(set) * ways_ + w].live()) ++n;
  return n;
}

bool SubscriptionTable::eviction_in_progress(uint32_t set) const {
  for (uint32_t w = 0; w < ways_; ++w) {
    const SubEntry& e = entries_[static_cast<size_t>(set) * ways_ + w];
    if (e.valid && (e.state == SubState::PendingUnsubscription ||
                    e.state == SubState::PendingResubscription))
      return true;
  }
  return false;
}

void SubscriptionTable::halve_freqs() {
  for (SubEntry& e : entries_)
    if (e.valid) e.freq >>= 1;
}

uint32_t SubscriptionTable::entry_index(const SubEntry& e) const {
  return static_cast<uint32_t>(&e - entries_.data());
}

bool SubscriptionBuffer::push(SubBufferEntry e) {
  if (full()) return false;
  entries_.push_back(e);
  return true;
}

bool SubscriptionBuffer::contains(BlockAddr addr) const {
  return std::any_of(entries_.begin(), entries_.end(),
                     [&](const SubBufferEntry& e) { return e.addr == addr; });
}

void SubscriptionBuffer::drop(BlockAddr addr) {
  entries_.erase(std::remove_if(entries_.begin(), entries_.end(),
                                [&](const SubBufferEntry& e) { return e.addr == addr; }),
                 entries_.end());
}

SubBufferEntry SubscriptionBuffer::take(size_t index) {
  SubBufferEntry e = entries_[index];
  entries_.erase(entries_.begin() + static_cast<ptrdiff_t>(index));
  return e;
}

}  // namespace dlpim
