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

// Subscription-flow tests on micro traces over the 4x2 preset.
// Vault coordinates: 0:(0,0) 1:(0,1) 2:(1,0) 3:(1,1) 4:(2,0) 5:(2,1)
// 6:(3,0) 7:(3,1). Block b is homed at vault b % 8.

#include <doctest.h>

#include <algorithm>

#include "helpers.hpp"

using namespace dlpim;
using namespace dlpim::test;

TEST_CASE("cold subscription makes the second access local") {
  SimConfig cfg = micro_config();
  std::vector<TraceRecord> trace = {rec(0, 0, Op::Read, 1),
                                    rec(400, 0, Op::Read, 1)};
  Simulator sim(cfg, trace);
  const StatsReport r = sim.run();

  REQUIRE(r.requests_completed == 2);
  const auto& log = sim.request_log();
  CHECK(log[0].network == 6);  // (k+1) * 1 hop
  CHECK(log[0].served_by == 1);
  CHECK(log[1].network == 0);  // reserved-space hit
  CHECK(log[1].queuing == 0);
  CHECK(log[1].array == cfg.t_array);
  CHECK(log[1].served_by == 0);

  CHECK(r.subscriptions_attempted == 1);
  CHECK(r.subscriptions_completed == 1);
  CHECK(r.reuse_tenures == 1);
  CHECK(r.reuse_local == 1);
  CHECK(r.reuse_remote == 0);

  const SubEntry* at_home = sim.vault(1).table.find(64);
  REQUIRE(at_home != nullptr);
  CHECK(at_home->state == SubState::Subscribed);
  CHECK(at_home->current_vault == 0);
  const SubEntry* at_holder = sim.vault(0).table.find(64);
  REQUIRE(at_holder != nullptr);
  CHECK(at_holder->state == SubState::Subscribed);
  CHECK(sim.vault(0).slots[at_holder->slot].valid);
  CHECK(!sim.vault(0).slots[at_holder->slot].dirty);
  check_memory_oracle(sim, cfg);
}

TEST_CASE("resubscription moves the block to the newest requester") {
  SimConfig cfg = micro_config();
  std::vector<TraceRecord> trace = {rec(0, 0, Op::Read, 1),
                                    rec(600, 2, Op::Read, 1)};
  Simulator sim(cfg, trace);
  const StatsReport r = sim.run();

  CHECK(r.resubscriptions == 1);
  const SubEntry* at_home = sim.vault(1).table.find(64);
  REQUIRE(at_home != nullptr);
  CHECK(at_home->state == SubState::Subscribed);
  CHECK(at_home->current_vault == 2);
  CHECK(sim.vault(0).table.find(64) == nullptr);  // old holder evicted
  const SubEntry* at_new = sim.vault(2).table.find(64);
  REQUIRE(at_new != nullptr);
  CHECK(at_new->state == SubState::Subscribed);
  check_no_pending(sim);
  check_memory_oracle(sim, cfg);
}

TEST_CASE("home access converts into an unsubscription and brings data back") {
  SimConfig cfg = micro_config();
  std::vector<TraceRecord> trace = {rec(0, 0, Op::Read, 1),
                                    rec(600, 1, Op::Read, 1)};
  Simulator sim(cfg, trace);
  const StatsReport r = sim.run();

  CHECK(r.unsubscriptions == 1);
  CHECK(sim.vault(1).table.find(64) == nullptr);
  CHECK(sim.vault(0).table.find(64) == nullptr);
  CHECK(r.requests_completed == 2);
  check_no_pending(sim);
  check_memory_oracle(sim, cfg);
}

TEST_CASE("clean unsubscription returns an ack, dirty returns the data") {
  // Same scenario, one intermediate local write toggles the return payload.
  // Exact flit-hop totals pin the packet sizes of every flow leg.
  SimConfig cfg = micro_config();

  std::vector<TraceRecord> clean = {rec(0, 0, Op::Read, 1),
                                    rec(900, 1, Op::Read, 1)};
  Simulator clean_sim(cfg, clean);
  const StatsReport clean_r = clean_sim.run();
  CHECK(clean_r.flit_hops == 22);

  std::vector<TraceRecord> dirty = {rec(0, 0, Op::Read, 1),
                                    rec(400, 0, Op::Write, 1),
                                    rec(500, 1, Op::Read, 1)};
  Simulator dirty_sim(cfg, dirty);
  const StatsReport dirty_r = dirty_sim.run();
  // The local write adds no packets; the return grows from 1 to k flits.
  CHECK(dirty_r.flit_hops == 26);
  check_memory_oracle(dirty_sim, cfg);
}

TEST_CASE("two writes collapse into a single writeback") {
  SimConfig cfg = micro_config();
  std::vector<TraceRecord> trace = {rec(0, 0, Op::Read, 1),
                                    rec(400, 0, Op::Write, 1),
                                    rec(100, 0, Op::Write, 1),
                                    rec(600, 1, Op::Read, 1)};
  Simulator sim(cfg, trace);
  const StatsReport r = sim.run();
  CHECK(r.unsubscriptions == 1);
  // One extra MemWrite never crossed the network (both writes were local),
  // and the dirty return carries the data exactly once.
  CHECK(r.flit_hops == 26);
  CHECK(sim.commit_log().size() == 2);
  check_memory_oracle(sim, cfg);
}

TEST_CASE("concurrent subscription requests: one wins, one is refused") {
  SimConfig cfg = micro_config();
  std::vector<TraceRecord> trace = {rec(0, 0, Op::Read, 1),
                                    rec(0, 2, Op::Read, 1)};
  Simulator sim(cfg, trace);
  const StatsReport r = sim.run();

  CHECK(r.subscriptions_attempted == 2);
  CHECK(r.subscriptions_completed == 1);
  CHECK(r.subscriptions_nacked == 1);
  CHECK(r.requests_completed == 2);  // both reads succeed regardless
  // Vault 0 is one hop from the home, vault 2 is two: vault 0 wins.
  const SubEntry* at_home = sim.vault(1).table.find(64);
  REQUIRE(at_home != nullptr);
  CHECK(at_home->current_vault == 0);
  CHECK(sim.vault(2).table.find(64) == nullptr);  // rolled back
  check_no_pending(sim);
}

TEST_CASE("full set defers through the buffer, full buffer gives up") {
  SimConfig cfg = micro_config();
  cfg.table_sets = 1;
  cfg.table_ways = 1;
  cfg.buffer_entries = 1;
  cfg.max_outstanding = 3;
  // Three different remote blocks from core 0, issued back to back.
  std::vector<TraceRecord> trace = {rec(0, 0, Op::Read, 1),
                                    rec(1, 0, Op::Read, 2),
                                    rec(1, 0, Op::Read, 3)};
  Simulator sim(cfg, trace);
  const StatsReport r = sim.run();

  CHECK(r.requests_completed == 3);
  // Block 3's attempt found both the set and the buffer full: no-op.
  CHECK(r.subscriptions_attempted == 2);
  CHECK(r.subscriptions_completed == 2);
  CHECK(r.subscriptions_nacked == 0);
  // Block 1 made room for block 2 through a victim unsubscription.
  CHECK(r.unsubscriptions == 1);
  CHECK(sim.vault(0).table.find(2 * 64) != nullptr);
  CHECK(sim.vault(0).table.find(1 * 64) == nullptr);
  CHECK(sim.vault(0).table.find(3 * 64) == nullptr);
  check_no_pending(sim);
  check_memory_oracle(sim, cfg);
}

TEST_CASE("least-used block is the eviction victim") {
  SimConfig cfg = micro_config();
  cfg.table_sets = 1;
  cfg.table_ways = 2;
  // Core 0 subscribes blocks 1 and 2, then keeps touching block 1.
  std::vector<TraceRecord> trace = {rec(0, 0, Op::Read, 1),
                                    rec(300, 0, Op::Read, 2),
                                    rec(300, 0, Op::Read, 1),
                                    rec(60, 0, Op::Read, 1),
                                    rec(60, 0, Op::Read, 1),
                                    rec(60, 0, Op::Read, 3)};  // forces eviction
  Simulator sim(cfg, trace);
  sim.run();
  CHECK(sim.vault(0).table.find(1 * 64) != nullptr);  // hot block survives
  CHECK(sim.vault(0).table.find(2 * 64) == nullptr);  // cold block evicted
  CHECK(sim.vault(0).table.find(3 * 64) != nullptr);
  check_no_pending(sim);
}

TEST_CASE("writes do not subscribe when the write gate is off") {
  SimConfig cfg = micro_config();
  cfg.subscribe_on_write = false;
  std::vector<TraceRecord> trace = {rec(0, 0, Op::Write, 1)};
  Simulator sim(cfg, trace);
  const StatsReport r = sim.run();
  CHECK(r.subscriptions_attempted == 0);
  CHECK(sim.request_log()[0].network == 5 * 1);  // k * h_ro, ack uncharged
  check_memory_oracle(sim, cfg);
}

TEST_CASE("subscriptions off reduces every request to the baseline formulas") {
  SimConfig cfg = micro_config();
  cfg.policy = PolicyKind::AlwaysOff;
  std::vector<TraceRecord> trace;
  for (uint32_t core = 0; core < 8; ++core) {
    trace.push_back(rec(0, core, Op::Read, core * 3 + 1));
    trace.push_back(rec(500, core, Op::Write, core * 5 + 2));
  }
  Simulator sim(cfg, trace);
  const StatsReport r = sim.run();
  CHECK(r.subscriptions_attempted == 0);
  const Topology& topo = sim.topology();
  for (const RequestRecord& req : sim.request_log()) {
    const uint32_t h = topo.manhattan(req.core, home_of(cfg, topo, req.addr));
    const uint64_t k = cfg.data_flits();
    if (req.op == Op::Read) CHECK(req.network == (k + 1) * h);
    else CHECK(req.network == k * h);
    CHECK(req.array == cfg.t_array);
  }
  check_memory_oracle(sim, cfg);
}

TEST_CASE("mini fuzz: churn with a tiny table drains clean") {
  SimConfig cfg = micro_config();
  cfg.table_sets = 4;
  cfg.table_ways = 2;
  cfg.buffer_entries = 4;
  cfg.epoch_cycles = 5000;  // audits at every boundary
  cfg.trace_gen = "";
  GeneratorSpec gen = GeneratorSpec::parse("zipf:n=20000,blocks=300,s=1.1,write_frac=0.4");
  const Topology topo = Topology::preset("hbm4x2");
  std::vector<TraceRecord> trace = generate_trace(gen, topo, cfg.block_bytes, 11);
  cfg.forced_policy_flips = {{3000, false}, {8000, true}, {15000, false}, {21000, true}};
  Simulator sim(cfg, trace);
  const StatsReport r = sim.run();
  CHECK(r.requests_completed == 20000);
  check_no_pending(sim);
  check_memory_oracle(sim, cfg);
  sim.audit();
}
