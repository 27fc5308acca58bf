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

#include "dlpim/subscription_table.hpp"

using namespace dlpim;

namespace {
constexpr uint32_t kBlock = 64;
constexpr uint32_t kVaults = 8;

BlockAddr addr_in_set(const SubscriptionTable& t, uint32_t set, uint32_t salt) {
  // Scan for an address landing in the requested set.
  for (uint64_t block = salt;; block += 1) {
    const BlockAddr a = block * kBlock;
    if (t.set_of(a) == set) return a;
  }
}
}  // namespace

TEST_CASE("set index ignores the vault-interleaving bits") {
  SubscriptionTable t(16, 4, kBlock, kVaults);
  // Blocks differing only in their home vault share a set.
  CHECK(t.set_of(0 * kBlock) == t.set_of(5 * kBlock));
  // The next block group moves to the next set.
  CHECK(t.set_of(kVaults * kBlock) == (t.set_of(0) + 1) % 16);
}

TEST_CASE("allocate fills ways and refuses a full set") {
  SubscriptionTable t(4, 4, kBlock, kVaults);
  std::vector<SubEntry*> got;
  for (uint32_t i = 0; i < 4; ++i) {
    SubEntry* e = t.allocate(addr_in_set(t, 2, i * kVaults * 4), 10);
    REQUIRE(e != nullptr);
    e->state = SubState::Subscribed;
    got.push_back(e);
  }
  CHECK(t.live_count(2) == 4);
  CHECK(t.allocate(addr_in_set(t, 2, 1000 * kVaults), 11) == nullptr);
  // Releasing one way makes room again.
  t.release(*got[1]);
  CHECK(t.live_count(2) == 3);
  CHECK(t.allocate(addr_in_set(t, 2, 1000 * kVaults), 12) != nullptr);
}

TEST_CASE("victim choice is least-frequent, oldest-touch on ties") {
  SubscriptionTable t(1, 4, kBlock, kVaults);
  const uint8_t freqs[4] = {5, 1, 3, 4};
  SubEntry* entries[4];
  for (uint32_t i = 0; i < 4; ++i) {
    entries[i] = t.allocate(static_cast<BlockAddr>(i) * kVaults * kBlock, i);
    REQUIRE(entries[i] != nullptr);
    entries[i]->state = SubState::Subscribed;
    entries[i]->freq = freqs[i];
    entries[i]->last_touch = 100 + i;
  }
  CHECK(t.pick_victim(0) == entries[1]);

  SUBCASE("tie broken by last_touch") {
    entries[0]->freq = 2; entries[0]->last_touch = 10;
    entries[1]->freq = 2; entries[1]->last_touch = 4;
    entries[2]->freq = 9;
    entries[3]->freq = 9;
    CHECK(t.pick_victim(0) == entries[1]);
  }

  SUBCASE("pending entries are not victims") {
    entries[1]->state = SubState::PendingUnsubscription;
    CHECK(t.pick_victim(0) == entries[2]);  // next-lowest freq
    for (SubEntry* e : entries) e->state = SubState::PendingSubscription;
    CHECK(t.pick_victim(0) == nullptr);
  }
}

TEST_CASE("freq counters saturate and halve") {
  SubscriptionTable t(1, 1, kBlock, kVaults);
  SubEntry* e = t.allocate(0, 0);
  e->state = SubState::Subscribed;
  for (int i = 0; i < 600; ++i) e->touch(i);
  CHECK(e->freq == 255);
  t.halve_freqs();
  CHECK(e->freq == 127);
}

TEST_CASE("subscription buffer capacity and address operations") {
  SubscriptionBuffer b(3);
  CHECK(b.push({0, 1, 64, 0, false}));
  CHECK(b.push({0, 2, 128, 1, false}));
  CHECK(b.push({0, 3, 192, 2, true}));
  CHECK(b.full());
  CHECK(!b.push({0, 4, 256, 3, false}));
  CHECK(b.contains(128));
  b.drop(128);
  CHECK(!b.contains(128));
  CHECK(b.size() == 2);
  const SubBufferEntry e = b.take(0);
  CHECK(e.addr == 64);
  CHECK(b.entries().front().addr == 192);
}
