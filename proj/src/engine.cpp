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

#include "dlpim/engine.hpp"

#include <algorithm>
#include <sstream>

namespace dlpim {

Simulator::Simulator(SimConfig cfg, std::vector<TraceRecord> trace)
    : cfg_(std::move(cfg)), topo_(build_topology(cfg_)), net_(topo_) {
  cfg_.validate();
  flits_for(cfg_.block_bytes);  // validates block size

  const uint32_t vcount = topo_.vault_count();
  vaults_.reserve(vcount);
  for (VaultId v = 0; v < vcount; ++v) {
    vaults_.push_back(std::make_unique<VaultState>(
        v, cfg_.table_sets, cfg_.table_ways, cfg_.block_bytes, vcount,
        cfg_.buffer_entries));
  }
  set_classes_ = assign_set_classes(cfg_.table_sets, cfg_.leader_stride, cfg_.sampling);
  central_.configure(cfg_, vcount);

  // Adaptive policies start the first epoch subscribing everywhere.
  const bool initial_on = cfg_.policy != PolicyKind::AlwaysOff;
  central_on_ = initial_on;
  for (auto& v : vaults_) v->subscribe_on = initial_on;
  epoch_samples_.push_back({1, initial_on});

  cores_.resize(vcount);
  if (cfg_.l1_enabled) {
    const uint32_t sets = cfg_.l1_bytes / (cfg_.l1_ways * cfg_.block_bytes);
    for (CoreState& c : cores_) c.l1.resize(sets);
  }
  for (TraceRecord& rec : trace) {
    if (rec.core >= vcount)
      throw TraceError("trace references core " + std::to_string(rec.core) +
                       " but the topology has " + std::to_string(vcount) + " vaults");
    rec.addr -= rec.addr % cfg_.block_bytes;  // align down for routing
    cores_[rec.core].records.push_back(rec);
  }
  for (CoreState& c : cores_)
    c.earliest_issue = c.records.empty() ? 0 : c.records.front().delta;

  vault_serves_.assign(vcount, 0);
  report_lead_ = cfg_.central_decision_latency + 2ull * topo_.max_pairwise_distance();
  if (cfg_.warmup_requests == 0) warmup_done_ = true;

  std::sort(cfg_.forced_policy_flips.begin(), cfg_.forced_policy_flips.end());
}

VaultId Simulator::home_vault(BlockAddr addr) const {
  return static_cast<VaultId>((addr / cfg_.block_bytes) % topo_.vault_count());
}

SetClass Simulator::class_of(BlockAddr addr) const {
  return set_classes_[vaults_[0]->table.set_of(addr)];
}

bool Simulator::policy_on_for(const VaultState& v, BlockAddr addr) const {
  switch (class_of(addr)) {
    case SetClass::AlwaysOnLeader: return true;
    case SetClass::AlwaysOffLeader: return false;
    default: return v.subscribe_on;
  }
}

Packet Simulator::make_packet(RequestKind kind, VaultId from, VaultId to,
                              BlockAddr addr, uint32_t flits) {
  Packet p;
  p.id = next_packet_id_++;
  p.kind = kind;
  p.from = from;
  p.to = to;
  p.addr = addr;
  p.flits = flits;
  p.issue_cycle = cycle_;
  return p;
}

void Simulator::send_packet(Packet pkt) {
  net_.send(std::move(pkt), cycle_);
}

void Simulator::schedule(Cycle delay, EffectKind kind, VaultId vault, Packet pkt) {
  Effect e;
  e.at = cycle_ + delay;
  e.seq = effect_seq_++;
  e.kind = kind;
  e.vault = vault;
  e.pkt = std::move(pkt);
  if (delay == 0) {
    // Zero-latency consequences apply within the same cycle so the latency
    // ledger stays gap-free even with t_array = 0.
    apply_effect(e);
    return;
  }
  effects_.push(std::move(e));
}

bool Simulator::drained() const {
  if (!trace_exhausted_) return false;
  if (!inflight_.empty() || !effects_.empty() || !net_.idle()) return false;
  for (const auto& v : vaults_) {
    if (!v->service_queue.empty() || v->parked_count != 0 || !v->buffer.empty())
      return false;
  }
  if (pending_entries_ != 0) return false;
  return true;
}

bool Simulator::finished() const { return drained(); }

void Simulator::tick() {
  run_effects();
  deliver_packets();
  service_vaults();
  issue_cores();
  net_.step(cycle_);
  epoch_bookkeeping();
  ++cycle_;

  if (cfg_.max_cycles != 0 && cycle_ > cfg_.max_cycles)
    throw SimError("exceeded max_cycles = " + std::to_string(cfg_.max_cycles));
  if (cycle_ - last_progress_ > 1'000'000)
    throw SimError("no forward progress for 1M cycles (stuck protocol state)");
}

void Simulator::run_cycles(Cycle n) {
  for (Cycle i = 0; i < n && !drained(); ++i) tick();
}

StatsReport Simulator::run() {
  while (!drained()) tick();
  // Close still-open tenures so reuse averages cover every subscription.
  for (auto& v : vaults_) {
    for (uint32_t i = 0; i < v->table.entry_count(); ++i) {
      const SubEntry& e = v->table.entry(i);
      if (e.valid && e.state == SubState::Subscribed &&
          home_vault(e.addr) != v->id)
        close_tenure(*v, e);
    }
  }
  audit_or_throw();
  return build_report();
}

void Simulator::run_effects() {
  while (!effects_.empty() && effects_.top().at <= cycle_) {
    Effect e = effects_.top();
    effects_.pop();
    apply_effect(e);
    note_progress();
  }
}

void Simulator::deliver_packets() {
  for (Packet& pkt : net_.take_delivered()) {
    vaults_[pkt.to]->enqueue_service(std::move(pkt), cycle_);
    note_progress();
  }
}

void Simulator::service_vaults() {
  for (auto& vp : vaults_) {
    VaultState& v = *vp;
    v.served_this_cycle = false;
    if (!v.service_queue.empty()) {
      ServiceItem item = std::move(v.service_queue.front());
      v.service_queue.pop_front();
      v.served_this_cycle = true;
      item.pkt.tally.queuing += cycle_ - item.arrival;
      dispatch_service(v, std::move(item));
      note_progress();
    }
    buffer_scan(v);
  }
}

bool Simulator::l1_filters(CoreState& core, const TraceRecord& rec) {
  // Optional read filter for raw (pre-cache) traces. Writes pass through so
  // the memory image stays exact; read hits are absorbed.
  if (core.l1.empty()) return false;
  const uint64_t block = rec.addr / cfg_.block_bytes;
  L1Set& set = core.l1[block % core.l1.size()];
  auto it = std::find(set.lines.begin(), set.lines.end(), rec.addr);
  const bool hit = it != set.lines.end();
  if (hit) {
    set.lines.erase(it);
    set.lines.insert(set.lines.begin(), rec.addr);
    return rec.op == Op::Read;
  }
  set.lines.insert(set.lines.begin(), rec.addr);
  if (set.lines.size() > cfg_.l1_ways) set.lines.pop_back();
  return false;
}

void Simulator::issue_cores() {
  for (uint32_t c = 0; c < cores_.size(); ++c) {
    CoreState& core = cores_[c];
    if (core.done()) continue;
    if (core.outstanding >= cfg_.max_outstanding) continue;
    if (cycle_ < core.earliest_issue) {
      note_progress();  // compute gap, not a stall
      continue;
    }
    const TraceRecord rec = core.records[core.next];
    ++core.next;
    const Cycle next_delta = core.done() ? 0 : core.records[core.next].delta;
    core.earliest_issue = cycle_ + next_delta;
    if (l1_filters(core, rec)) continue;
    issue_request(c, rec);
    note_progress();
  }
  if (!trace_exhausted_) {
    trace_exhausted_ = std::all_of(cores_.begin(), cores_.end(),
                                   [](const CoreState& c) { return c.done(); });
  }
}

void Simulator::issue_request(uint32_t core_id, const TraceRecord& rec) {
  CoreState& core = cores_[core_id];
  const VaultId self = core_id;
  VaultState& v = *vaults_[self];
  const BlockAddr addr = rec.addr;
  const VaultId home = home_vault(addr);

  RequestState req;
  req.id = next_request_id_++;
  req.core = core_id;
  req.op = rec.op;
  req.addr = addr;
  req.issue = cycle_;
  req.counted = warmup_done_;
  inflight_.emplace(req.id, req);
  ++core.outstanding;
  ++issued_total_;
  if (warmup_done_) ++stat_issued_;

  Packet pkt = make_packet(rec.op == Op::Read ? RequestKind::MemRead : RequestKind::MemWrite,
                           self, home, addr,
                           rec.op == Op::Read ? 1 : cfg_.data_flits());
  pkt.requester = self;
  pkt.request_id = req.id;
  pkt.write_id = rec.op == Op::Write ? req.id : 0;

  const SubEntry* entry = v.table.find(addr);
  const bool held_here = entry != nullptr && home != self &&
                         entry->state == SubState::Subscribed;

  if (held_here || home == self) {
    // Local lookup path: no request packet leaves this vault. If the vault's
    // service slot is still free this cycle, service starts immediately.
    pkt.to = self;
    if (!v.served_this_cycle) {
      v.served_this_cycle = true;
      dispatch_service(v, {std::move(pkt), cycle_});
    } else {
      v.enqueue_service(std::move(pkt), cycle_);
    }
  } else {
    send_packet(std::move(pkt));
  }

  // Subscription side channel: first remote touch subscribes (or, at the
  // home vault of a block that moved away, asks for it back).
  const bool gate = rec.op == Op::Read || cfg_.subscribe_on_write;
  if (gate && policy_on_for(v, addr)) {
    if (home == self) {
      SubEntry* own = v.table.find(addr);
      if (own != nullptr && own->state == SubState::Subscribed)
        start_unsubscription(v, *own);
    } else if (!held_here) {
      try_subscribe(v, addr, rec.op);
    }
  }
}

void Simulator::release_core(RequestId id) {
  const auto it = inflight_.find(id);
  if (it == inflight_.end() || it->second.core_released) return;
  it->second.core_released = true;
  --cores_[it->second.core].outstanding;
  if (it->second.completed) inflight_.erase(it);
}

void Simulator::complete_request(Packet& pkt, Cycle completed_at) {
  const auto it = inflight_.find(pkt.request_id);
  if (it == inflight_.end())
    throw SimError("completion for unknown request " + std::to_string(pkt.request_id));
  RequestState& req = it->second;
  if (req.completed)
    throw SimError("request " + std::to_string(req.id) + " completed twice");
  req.completed = true;

  // Latency ledger: every cycle from issue to completion must be attributed.
  const uint64_t wall = completed_at - req.issue;
  if (wall != pkt.tally.total()) {
    throw SimError("latency ledger mismatch for request " + std::to_string(req.id) +
                   ": wall=" + std::to_string(wall) +
                   " network=" + std::to_string(pkt.tally.network) +
                   " queuing=" + std::to_string(pkt.tally.queuing) +
                   " array=" + std::to_string(pkt.tally.array));
  }

  ++completed_total_;
  if (req.counted) {
    ++stat_completed_;
    if (req.op == Op::Read) ++stat_reads_; else ++stat_writes_;
    sum_network_ += pkt.tally.network;
    sum_queuing_ += pkt.tally.queuing;
    sum_array_ += pkt.tally.array;
    VaultState& rv = *vaults_[req.core];
    rv.registers.add_latency(class_of(req.addr), pkt.tally.total());
    record_completion_feedback(rv, req.addr, pkt.served_by);
    if (cfg_.request_log) {
      request_log_.push_back({req.id, req.core, req.op, req.addr, req.issue,
                              completed_at, pkt.tally.network, pkt.tally.queuing,
                              pkt.tally.array, pkt.served_by});
    }
  }

  if (req.core_released) inflight_.erase(it);
  if (!warmup_done_ && completed_total_ >= cfg_.warmup_requests) {
    warmup_done_ = true;
    reset_statistics();
  }
}

void Simulator::reset_statistics() {
  stats_start_ = cycle_ + 1;  // measurement starts after the boundary cycle
  stat_issued_ = stat_completed_ = stat_reads_ = stat_writes_ = 0;
  sum_network_ = sum_queuing_ = sum_array_ = 0;
  std::fill(vault_serves_.begin(), vault_serves_.end(), 0);
  subs_attempted_ = subs_completed_ = subs_nacked_ = 0;
  resubscriptions_ = unsubscriptions_ = 0;
  reuse_tenures_ = reuse_local_ = reuse_remote_ = 0;
  net_.reset_traffic_counters();
  for (auto& v : vaults_) {
    v->max_service_occupancy = v->service_queue.size();
    for (auto& [idx, tenure] : v->tenures) tenure = ReuseTenure{};
  }
  epoch_samples_.clear();
  epoch_samples_.push_back({cycle_ / cfg_.epoch_cycles + 1, central_on_});
}

void Simulator::record_completion_feedback(VaultState& requester, BlockAddr addr,
                                           VaultId served_by) {
  // Hop feedback exists only for requests satisfied from a reserved slot;
  // a home-served request travels exactly its estimate.
  if (served_by == kNoVault || served_by == home_vault(addr)) return;
  const uint32_t est = topo_.manhattan(requester.id, home_vault(addr));
  const uint32_t actual = topo_.manhattan(requester.id, served_by);
  if (est > actual) requester.registers.add_feedback(class_of(addr), +1);
  else if (actual > est) requester.registers.add_feedback(class_of(addr), -1);
}

void Simulator::record_serve_feedback(VaultState& holder, BlockAddr addr,
                                      VaultId requester) {
  // Holder-side half of the dual update: a subscription that moved data
  // further from its consumers penalizes the vault hosting it as well.
  const uint32_t est = topo_.manhattan(requester, home_vault(addr));
  const uint32_t actual = topo_.manhattan(requester, holder.id);
  if (actual > est) holder.registers.add_feedback(class_of(addr), -1);
}

// --- epoch machinery ------------------------------------------------------

void Simulator::emit_policy_reports() {
  for (auto& vp : vaults_) {
    Packet p = make_packet(RequestKind::PolicyStatsReport, vp->id,
                           topo_.central_vault(), 0, 2);
    p.has_report = true;
    p.report = vp->registers.snapshot();
    send_packet(std::move(p));
  }
}

void Simulator::central_broadcast(bool on, uint64_t next_epoch) {
  central_on_ = on;
  for (auto& vp : vaults_) {
    send_packet(make_packet(on ? RequestKind::TurnOnSubscription
                               : RequestKind::TurnOffSubscription,
                            topo_.central_vault(), vp->id, 0, 1));
  }
  epoch_samples_.push_back({next_epoch, on});
}

void Simulator::epoch_boundary() {
  for (auto& vp : vaults_) {
    vp->registers.clear();
    vp->table.halve_freqs();
  }
  if (cfg_.audit_enabled) audit_or_throw();
}

void Simulator::epoch_bookkeeping() {
  // Forced flips (test hook) act as external broadcasts.
  while (next_forced_flip_ < cfg_.forced_policy_flips.size() &&
         cfg_.forced_policy_flips[next_forced_flip_].first <= cycle_) {
    central_broadcast(cfg_.forced_policy_flips[next_forced_flip_].second,
                      cycle_ / cfg_.epoch_cycles + 1);
    ++next_forced_flip_;
  }

  const bool adaptive = cfg_.policy == PolicyKind::HopsAdaptive ||
                        cfg_.policy == PolicyKind::LatencyAdaptive;
  const Cycle epoch = cfg_.epoch_cycles;

  if (adaptive && cfg_.global_decisions && !trace_exhausted_) {
    const uint64_t current_epoch = cycle_ / epoch + 1;
    const Cycle emit_at = current_epoch * epoch > report_lead_
                              ? current_epoch * epoch - report_lead_
                              : 0;
    if (cycle_ == emit_at && last_emitted_epoch_ < current_epoch) {
      last_emitted_epoch_ = current_epoch;
      emit_policy_reports();
    }
  }

  if (cycle_ != 0 && cycle_ % epoch == 0) {
    if (adaptive && !cfg_.global_decisions && !trace_exhausted_) {
      // Local ablation mode: every vault decides from its own registers.
      const uint64_t done_epoch = cycle_ / epoch;
      for (auto& vp : vaults_) {
        VaultState& v = *vp;
        bool next = v.subscribe_on;
        if (cfg_.policy == PolicyKind::HopsAdaptive || done_epoch <= cfg_.bootstrap_epochs) {
          next = CentralPolicy::decide_hops(v.registers.cls, cfg_.sampling, v.subscribe_on);
          if (cfg_.policy == PolicyKind::LatencyAdaptive) {
            uint64_t lat = 0, req = 0;
            for (const auto& c : v.registers.cls) { lat += c.latency_sum; req += c.requests; }
            if (req > 0) {
              v.prev_avg = static_cast<double>(lat) / static_cast<double>(req);
              v.prev_avg_valid = true;
            }
          }
        } else {
          double new_avg = v.prev_avg;
          next = CentralPolicy::decide_latency(v.registers.cls, cfg_.sampling,
                                               v.subscribe_on, cfg_.latency_threshold,
                                               v.prev_avg_valid, v.prev_avg, &new_avg);
          uint64_t req = 0;
          for (const auto& c : v.registers.cls) req += c.requests;
          if (req > 0) { v.prev_avg = new_avg; v.prev_avg_valid = true; }
        }
        v.subscribe_on = next;
      }
      epoch_samples_.push_back({cycle_ / epoch + 1,
                                vaults_[topo_.central_vault()]->subscribe_on});
    }
    epoch_boundary();
  }
}

StatsReport Simulator::build_report() const {
  StatsReport r;
  r.preset = topo_.name();
  r.policy = to_string(cfg_.policy);
  r.seed = cfg_.seed;
  r.block_bytes = cfg_.block_bytes;
  r.t_array = cfg_.t_array;
  r.table_sets = cfg_.table_sets;
  r.table_ways = cfg_.table_ways;
  r.total_cycles = cycle_ - stats_start_;
  r.requests_issued = stat_issued_;
  r.requests_completed = stat_completed_;
  r.reads = stat_reads_;
  r.writes = stat_writes_;
  r.network_cycles = sum_network_;
  r.queuing_cycles = sum_queuing_;
  r.array_cycles = sum_array_;
  r.total_latency = sum_network_ + sum_queuing_ + sum_array_;
  r.vault_serves = vault_serves_;
  r.cov_serves = cov(vault_serves_);
  r.flit_hops = net_.flit_hops();
  r.injected_flits = net_.injected_flits();
  if (r.total_cycles > 0) {
    r.bytes_per_cycle = static_cast<double>(r.flit_hops) * 16.0 /
                        static_cast<double>(r.total_cycles);
    r.bytes_per_cycle_injected = static_cast<double>(r.injected_flits) * 16.0 /
                                 static_cast<double>(r.total_cycles);
  }
  r.subscriptions_attempted = subs_attempted_;
  r.subscriptions_completed = subs_completed_;
  r.subscriptions_nacked = subs_nacked_;
  r.resubscriptions = resubscriptions_;
  r.unsubscriptions = unsubscriptions_;
  r.reuse_tenures = reuse_tenures_;
  r.reuse_local = reuse_local_;
  r.reuse_remote = reuse_remote_;
  for (const auto& v : vaults_) r.max_service_queue.push_back(v->max_service_occupancy);
  r.epochs = epoch_samples_;
  return r;
}

void Simulator::audit() const { audit_or_throw(); }

}  // namespace dlpim
