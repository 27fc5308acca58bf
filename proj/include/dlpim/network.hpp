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

#include <array>
#include <deque>
#include <functional>
#include <vector>

#include "dlpim/topology.hpp"
#include "dlpim/types.hpp"

namespace dlpim {

// Flits for one data-carrying packet: one header flit plus 16B data flits.
uint32_t flits_for(uint32_t block_bytes);

// Store-and-forward mesh with dimension-ordered (column first) routing.
//
// Timing model: moving a k-flit packet across one link takes k cycles and the
// link carries one packet at a time, so a k-flit packet over h idle hops costs
// exactly k*h cycles, all charged to the packet's network tally. Any cycle a
// packet spends parked in a buffer (or queued at its source) is charged to
// queuing. Two virtual channels with private 16-entry input buffers keep
// responses from stalling behind fresh requests; transmission only starts
// once the downstream buffer has a free slot, so nothing is ever dropped.
//
// Grid positions without a vault forward packets at the same hop cost but can
// never be packet endpoints.
class Network {
 public:
  Network(const Topology& topo, uint32_t buffer_entries = 16);

  // Injects at the source. from == to bypasses the mesh entirely: the packet
  // shows up in the next delivery batch with zero network cycles.
  void send(Packet pkt, Cycle now);

  // Advances one cycle: starts transmissions, then lands the ones finishing
  // this cycle.
  void step(Cycle now);

  // Packets that finished their last hop and are ready for vault service.
  std::vector<Packet> take_delivered();

  bool idle() const { return in_flight_ == 0 && staged_.empty(); }
  uint64_t in_flight() const { return in_flight_; }

  uint64_t sent_count() const { return sent_; }
  uint64_t delivered_count() const { return delivered_; }
  // Traffic ledger: sum over completed hops of the packet's flit count.
  uint64_t flit_hops() const { return flit_hops_; }
  uint64_t injected_flits() const { return injected_flits_; }
  uint32_t max_buffer_occupancy() const { return max_occupancy_; }
  void reset_traffic_counters();

  // Visits every packet currently inside the network (buffers, links and the
  // staged delivery batch). Used by consistency audits.
  void for_each_packet(const std::function<void(const Packet&)>& fn) const;

 private:
  static constexpr uint32_t kPorts = 5;  // N, E, S, W + local injection
  static constexpr uint32_t kInjPort = 4;
  static constexpr uint32_t kVcs = 2;

  struct Link {
    bool busy = false;
    Cycle done_at = 0;
    Packet pkt;
    uint32_t rr = kPorts * kVcs - 1;  // round-robin pointer over (port, vc)
  };

  struct Node {
    std::array<std::array<std::deque<Packet>, kVcs>, kPorts> buf;
    std::array<std::array<uint32_t, kVcs>, kPorts> reserved{};  // inbound slots
    std::array<Link, 4> out;
  };

  struct InTransit {
    Cycle ready_since = 0;
  };

  uint32_t node_of(VaultId v) const;
  uint32_t node_index(uint32_t row, uint32_t col) const { return row * cols_ + col; }
  int next_dir(uint32_t node, uint32_t dest_node) const;
  uint32_t neighbor(uint32_t node, int dir) const;
  uint32_t occupancy(uint32_t node, uint32_t port, uint32_t vc) const;
  void note_occupancy(uint32_t node, uint32_t port, uint32_t vc);

  const Topology& topo_;
  uint32_t rows_, cols_;
  uint32_t capacity_;
  std::vector<Node> nodes_;
  std::vector<Packet> staged_;
  std::vector<Packet> self_staged_next_;  // from == to, surfaces next cycle

  uint64_t sent_ = 0;
  uint64_t delivered_ = 0;
  uint64_t in_flight_ = 0;
  uint64_t flit_hops_ = 0;
  uint64_t injected_flits_ = 0;
  uint32_t max_occupancy_ = 0;
};

}  // namespace dlpim
