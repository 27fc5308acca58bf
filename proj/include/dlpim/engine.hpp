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
#include <memory>
#include <queue>
#include <unordered_map>
#include <vector>

#include "dlpim/adaptive.hpp"
#include "dlpim/config.hpp"
#include "dlpim/network.hpp"
#include "dlpim/stats.hpp"
#include "dlpim/topology.hpp"
#include "dlpim/trace.hpp"
#include "dlpim/vault.hpp"

namespace dlpim {

// One write applied at the authoritative copy, in commit order. Replaying
// these against a flat memory must reproduce every block's final payload.
struct CommitRecord {
  BlockAddr addr = 0;
  uint64_t write_id = 0;
};

// Optional per-request log (config.request_log).
struct RequestRecord {
  RequestId id = 0;
  uint32_t core = 0;
  Op op = Op::Read;
  BlockAddr addr = 0;
  Cycle issue = 0;
  Cycle complete = 0;
  uint64_t network = 0;
  uint64_t queuing = 0;
  uint64_t array = 0;
  VaultId served_by = kNoVault;
};

// Deterministic cycle-level simulation of the vault network, the per-vault
// memory controllers and the subscription protocol. Phase order within a
// cycle: scheduled effects, packet delivery, vault service (plus the
// subscription-buffer scan), core issue, network step, epoch bookkeeping.
// Identical (config, trace) pairs produce byte-identical reports.
class Simulator {
 public:
  Simulator(SimConfig cfg, std::vector<TraceRecord> trace);

  StatsReport run();

  // Test support: advance at most `n` cycles (stops early when drained).
  void run_cycles(Cycle n);
  bool finished() const;
  StatsReport build_report() const;

  Cycle now() const { return cycle_; }
  const Topology& topology() const { return topo_; }
  const VaultState& vault(VaultId v) const { return *vaults_[v]; }
  const std::vector<CommitRecord>& commit_log() const { return commit_log_; }
  const std::vector<RequestRecord>& request_log() const { return request_log_; }
  const std::vector<SetClass>& set_classes() const { return set_classes_; }
  uint64_t issued_total() const { return issued_total_; }

  // Runs the protocol consistency audit immediately; throws SimError on any
  // violation.
  void audit() const;
  uint64_t audit_count() const { return audits_run_; }

 private:
  // Protocol state changes happen at service time; delayed effects release
  // pre-built consequences (a packet injection or a request completion) once
  // the array latency has elapsed. The one exception is storing an arriving
  // subscription transfer: its entry flips to Subscribed only when the
  // acknowledgements leave, so an immediate eviction can never overtake the
  // handshake on its way to the home vault.
  enum class EffectKind : uint8_t {
    Inject,
    Complete,
    StoreSubData,
    CentralBroadcast,
  };

  struct Effect {
    Cycle at = 0;
    uint64_t seq = 0;
    EffectKind kind{};
    VaultId vault = kNoVault;
    Packet pkt;  // carried context (addr, requester, tally, payload, ...)
  };

  struct EffectOrder {
    bool operator()(const Effect& a, const Effect& b) const {
      return a.at != b.at ? a.at > b.at : a.seq > b.seq;
    }
  };

  struct RequestState {
    RequestId id = 0;
    uint32_t core = 0;
    Op op = Op::Read;
    BlockAddr addr = 0;
    Cycle issue = 0;
    bool counted = false;       // issued after warmup
    bool core_released = false;
    bool completed = false;
  };

  struct L1Set {
    std::vector<BlockAddr> lines;  // MRU first
  };

  struct CoreState {
    std::vector<TraceRecord> records;
    size_t next = 0;
    uint32_t outstanding = 0;
    Cycle earliest_issue = 0;
    std::vector<L1Set> l1;
    bool done() const { return next >= records.size(); }
  };

  // --- cycle loop (engine.cpp) ---
  void tick();
  void run_effects();
  void deliver_packets();
  void service_vaults();
  void issue_cores();
  void epoch_bookkeeping();
  bool drained() const;
  void note_progress() { last_progress_ = cycle_; }

  void issue_request(uint32_t core, const TraceRecord& rec);
  bool l1_filters(CoreState& core, const TraceRecord& rec);
  void release_core(RequestId id);
  void complete_request(Packet& pkt, Cycle completed_at);
  void reset_statistics();

  // --- protocol flows (protocol.cpp) ---
  void dispatch_service(VaultState& v, ServiceItem item);
  void serve_memory_request(VaultState& v, Packet pkt);
  void handle_subscription_request(VaultState& v, Packet pkt);
  void handle_nack(VaultState& v, Packet pkt);
  void handle_sub_data(VaultState& v, Packet pkt);
  void store_sub_data(VaultState& v, const Packet& pkt);
  void handle_transfer_ack(VaultState& v, Packet pkt);
  void handle_unsub_request(VaultState& v, Packet pkt);
  void handle_unsub_return_or_ack(VaultState& v, Packet pkt);
  void buffer_scan(VaultState& v);
  void try_subscribe(VaultState& v, BlockAddr addr, Op op);
  void start_unsubscription(VaultState& v, SubEntry& entry);
  void settle_addr(VaultState& v, BlockAddr addr);
  void close_tenure(VaultState& v, const SubEntry& entry);
  void apply_effect(const Effect& e);

  static bool is_pending(SubState s) {
    return s == SubState::PendingSubscription ||
           s == SubState::PendingResubscription ||
           s == SubState::PendingUnsubscription;
  }
  void set_entry_state(SubEntry& e, SubState s);
  void release_entry(VaultState& v, SubEntry& e);
  void count_serve(const VaultState& v);
  void send_nack(VaultState& v, BlockAddr addr, VaultId requester);

  void schedule(Cycle delay, EffectKind kind, VaultId vault, Packet pkt);
  void send_packet(Packet pkt);
  Packet make_packet(RequestKind kind, VaultId from, VaultId to, BlockAddr addr,
                     uint32_t flits);

  VaultId home_vault(BlockAddr addr) const;
  SetClass class_of(BlockAddr addr) const;
  bool policy_on_for(const VaultState& v, BlockAddr addr) const;
  void commit_write(VaultState& v, BlockAddr addr, uint64_t write_id,
                    bool to_slot, uint32_t slot);

  void record_completion_feedback(VaultState& requester, BlockAddr addr,
                                  VaultId served_by);
  void record_serve_feedback(VaultState& holder, BlockAddr addr, VaultId requester);

  // --- epoch / adaptive (engine.cpp) ---
  void emit_policy_reports();
  void central_broadcast(bool on, uint64_t next_epoch);
  void epoch_boundary();

  // --- audits (audit.cpp) ---
  void audit_or_throw() const;

  SimConfig cfg_;
  Topology topo_;
  Network net_;
  std::vector<std::unique_ptr<VaultState>> vaults_;
  std::vector<CoreState> cores_;
  std::vector<SetClass> set_classes_;
  CentralPolicy central_;
  bool central_on_ = false;  // central's view of the normal-set policy

  Cycle cycle_ = 0;
  Cycle last_progress_ = 0;
  uint64_t effect_seq_ = 0;
  std::priority_queue<Effect, std::vector<Effect>, EffectOrder> effects_;

  std::unordered_map<RequestId, RequestState> inflight_;
  RequestId next_request_id_ = 1;
  uint64_t next_packet_id_ = 1;

  uint64_t issued_total_ = 0;     // lifetime, drives warmup
  uint64_t completed_total_ = 0;  // lifetime
  bool warmup_done_ = false;

  // statistics (post-warmup)
  Cycle stats_start_ = 0;
  uint64_t stat_issued_ = 0;
  uint64_t stat_completed_ = 0;
  uint64_t stat_reads_ = 0;
  uint64_t stat_writes_ = 0;
  uint64_t sum_network_ = 0;
  uint64_t sum_queuing_ = 0;
  uint64_t sum_array_ = 0;
  std::vector<uint64_t> vault_serves_;
  uint64_t subs_attempted_ = 0;
  uint64_t subs_completed_ = 0;
  uint64_t subs_nacked_ = 0;
  uint64_t resubscriptions_ = 0;
  uint64_t unsubscriptions_ = 0;
  uint64_t reuse_tenures_ = 0;
  uint64_t reuse_local_ = 0;
  uint64_t reuse_remote_ = 0;
  std::vector<EpochPolicySample> epoch_samples_;

  uint64_t pending_entries_ = 0;  // live entries in any pending state
  uint64_t last_emitted_epoch_ = 0;
  size_t next_forced_flip_ = 0;
  Cycle report_lead_ = 0;
  bool trace_exhausted_ = false;

  std::vector<CommitRecord> commit_log_;
  std::vector<RequestRecord> request_log_;
  mutable uint64_t audits_run_ = 0;
};

}  // namespace dlpim
