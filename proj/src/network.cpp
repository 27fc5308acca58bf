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

#include "dlpim/network.hpp"

#include <cassert>

namespace dlpim {

namespace {
// Directions: N shrinks the row, S grows it; E grows the column, W shrinks it.
constexpr int kNorth = 0, kEast = 1, kSouth = 2, kWest = 3;

int opposite(int dir) { return (dir + 2) % 4; }
}  // namespace

uint32_t flits_for(uint32_t block_bytes) {
  if (block_bytes != 16 && block_bytes != 32 && block_bytes != 64 && block_bytes != 128)
    throw ConfigError("unsupported block size " + std::to_string(block_bytes) +
                      " (16, 32, 64 or 128 bytes)");
  return block_bytes / 16 + 1;
}

const char* to_string(RequestKind kind) {
  switch (kind) {
    case RequestKind::MemRead: return "MemRead";
    case RequestKind::MemWrite: return "MemWrite";
    case RequestKind::MemReadReply: return "MemReadReply";
    case RequestKind::MemWriteAck: return "MemWriteAck";
    case RequestKind::SubscriptionRequest: return "SubscriptionRequest";
    case RequestKind::SubscriptionNack: return "SubscriptionNack";
    case RequestKind::SubscriptionDataTransfer: return "SubscriptionDataTransfer";
    case RequestKind::SubscriptionTransferAck: return "SubscriptionTransferAck";
    case RequestKind::UnsubscriptionRequest: return "UnsubscriptionRequest";
    case RequestKind::UnsubscriptionTransferAck: return "UnsubscriptionTransferAck";
    case RequestKind::TurnOnSubscription: return "TurnOnSubscription";
    case RequestKind::TurnOffSubscription: return "TurnOffSubscription";
    case RequestKind::PolicyStatsReport: return "PolicyStatsReport";
  }
  return "?";
}

Vc vc_for(RequestKind kind) {
  switch (kind) {
    case RequestKind::MemRead:
    case RequestKind::MemWrite:
    case RequestKind::SubscriptionRequest:
    case RequestKind::UnsubscriptionRequest:
    case RequestKind::TurnOnSubscription:
    case RequestKind::TurnOffSubscription:
    case RequestKind::PolicyStatsReport:
      return Vc::Request;
    default:
      return Vc::Response;
  }
}

Network::Network(const Topology& topo, uint32_t buffer_entries)
    : topo_(topo), rows_(topo.grid_rows()), cols_(topo.grid_cols()),
      capacity_(buffer_entries) {
  nodes_.resize(static_cast<size_t>(rows_) * cols_);
}

uint32_t Network::node_of(VaultId v) const {
  const Coord c = topo_.coord(v);
  return node_index(c.row, c.col);
}

int Network::next_dir(uint32_t node, uint32_t dest_node) const {
  const uint32_t row = node / cols_, col = node % cols_;
  const uint32_t drow = dest_node / cols_, dcol = dest_node % cols_;
  if (col < dcol) return kEast;
  if (col > dcol) return kWest;
  if (row < drow) return kSouth;
  if (row > drow) return kNorth;
  return -1;
}

uint32_t Network::neighbor(uint32_t node, int dir) const {
  const uint32_t row = node / cols_, col = node % cols_;
  switch (dir) {
    case kNorth: return node_index(row - 1, col);
    case kEast: return node_index(row, col + 1);
    case kSouth: return node_index(row + 1, col);
    default: return node_index(row, col - 1);
  }
}

uint32_t Network::occupancy(uint32_t node, uint32_t port, uint32_t vc) const {
  return static_cast<uint32_t>(nodes_[node].buf[port][vc].size()) +
         nodes_[node].reserved[port][vc];
}

void Network::note_occupancy(uint32_t node, uint32_t port, uint32_t vc) {
  if (port == kInjPort) return;  // source queue is unbounded
  const uint32_t occ = occupancy(node, port, vc);
  if (occ > max_occupancy_) max_occupancy_ = occ;
}

void Network::send(Packet pkt, Cycle now) {
  pkt.vc = vc_for(pkt.kind);
  ++sent_;
  ++in_flight_;
  injected_flits_ += pkt.flits;
  if (pkt.from == pkt.to) {
    // Local hand-off; never touches a link, costs no network cycles.
    self_staged_next_.push_back(std::move(pkt));
    return;
  }
  pkt.net_ready = now;
  const uint32_t node = node_of(pkt.from);
  nodes_[node].buf[kInjPort][static_cast<uint32_t>(pkt.vc)].push_back(std::move(pkt));
}

void Network::step(Cycle now) {
  // Start new transmissions on free links. A start consumes the head of the
  // winning (port, vc) buffer and reserves a slot downstream, so arrivals can
  // never overflow; round-robin over the ten head slots keeps it fair.
  for (uint32_t node = 0; node < nodes_.size(); ++node) {
    Node& n = nodes_[node];
    for (int dir = 0; dir < 4; ++dir) {
      const uint32_t row = node / cols_, col = node % cols_;
      if ((dir == kNorth && row == 0) || (dir == kSouth && row + 1 == rows_) ||
          (dir == kWest && col == 0) || (dir == kEast && col + 1 == cols_))
        continue;
      Link& link = n.out[dir];
      if (link.busy) continue;
      const uint32_t dest = neighbor(node, dir);
      const uint32_t entry_port = static_cast<uint32_t>(opposite(dir));
      for (uint32_t probe = 1; probe <= kPorts * kVcs; ++probe) {
        const uint32_t slot = (link.rr + probe) % (kPorts * kVcs);
        const uint32_t port = slot / kVcs;
        const uint32_t vc = slot % kVcs;
        auto& q = n.buf[port][vc];
        if (q.empty()) continue;
        Packet& head = q.front();
        const uint32_t final_node = node_of(head.to);
        if (next_dir(node, final_node) != dir) continue;
        if (dest != final_node && occupancy(dest, entry_port, vc) >= capacity_)
          continue;  // downstream full; let another channel use the link
        head.tally.queuing += now - head.net_ready;
        link.pkt = std::move(head);
        q.pop_front();
        link.busy = true;
        link.done_at = now + link.pkt.flits - 1;
        link.rr = slot;
        if (dest != final_node) {
          nodes_[dest].reserved[entry_port][vc] += 1;
          note_occupancy(dest, entry_port, vc);
        }
        break;
      }
    }
  }

  // Land transmissions finishing this cycle (including one-flit packets that
  // started above).
  for (uint32_t node = 0; node < nodes_.size(); ++node) {
    Node& n = nodes_[node];
    for (int dir = 0; dir < 4; ++dir) {
      Link& link = n.out[dir];
      if (!link.busy || link.done_at != now) continue;
      Packet pkt = std::move(link.pkt);
      link.busy = false;
      pkt.tally.network += pkt.flits;
      pkt.hops += 1;
      flit_hops_ += pkt.flits;
      const uint32_t dest = neighbor(node, dir);
      if (dest == node_of(pkt.to)) {
        staged_.push_back(std::move(pkt));
      } else {
        const uint32_t entry_port = static_cast<uint32_t>(opposite(dir));
        const uint32_t vc = static_cast<uint32_t>(pkt.vc);
        nodes_[dest].reserved[entry_port][vc] -= 1;
        pkt.net_ready = now + 1;
        nodes_[dest].buf[entry_port][vc].push_back(std::move(pkt));
        note_occupancy(dest, entry_port, vc);
      }
    }
  }
}

std::vector<Packet> Network::take_delivered() {
  std::vector<Packet> out = std::move(staged_);
  staged_.clear();
  for (Packet& p : self_staged_next_) out.push_back(std::move(p));
  self_staged_next_.clear();
  delivered_ += out.size();
  in_flight_ -= out.size();
  return out;
}

void Network::reset_traffic_counters() {
  flit_hops_ = 0;
  injected_flits_ = 0;
}

void Network::for_each_packet(const std::function<void(const Packet&)>& fn) const {
  for (const Node& n : nodes_) {
    for (const auto& ports : n.buf)
      for (const auto& q : ports)
        for (const Packet& p : q) fn(p);
    for (const Link& l : n.out)
      if (l.busy) fn(l.pkt);
  }
  for (const Packet& p : staged_) fn(p);
  for (const Packet& p : self_staged_next_) fn(p);
}

}  // namespace dlpim
