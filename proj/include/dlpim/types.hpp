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

#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>

namespace dlpim {

using Cycle = uint64_t;
using VaultId = uint32_t;
using BlockAddr = uint64_t;  // byte address, aligned down to the block size
using RequestId = uint64_t;

constexpr VaultId kNoVault = std::numeric_limits<VaultId>::max();
constexpr RequestId kNoRequest = 0;  // request ids start at 1

enum class Op : uint8_t { Read, Write };

// Message types moved across the vault network. The eight subscription kinds
// plus the on/off broadcasts carry the migration protocol; the Mem* kinds and
// PolicyStatsReport are request/response plumbing.
enum class RequestKind : uint8_t {
  MemRead,
  MemWrite,
  MemReadReply,
  MemWriteAck,
  SubscriptionRequest,
  SubscriptionNack,
  SubscriptionDataTransfer,
  SubscriptionTransferAck,
  UnsubscriptionRequest,
  UnsubscriptionTransferAck,
  TurnOnSubscription,
  TurnOffSubscription,
  PolicyStatsReport,
};

const char* to_string(RequestKind kind);

// Virtual channel classes. Data transfers and every acknowledgement ride the
// response channel so replies can always drain past fresh requests.
enum class Vc : uint8_t { Request = 0, Response = 1 };

Vc vc_for(RequestKind kind);

struct LatencyTally {
  uint64_t network = 0;
  uint64_t queuing = 0;
  uint64_t array = 0;

  uint64_t total() const { return network + queuing + array; }
};

// Per-leader-class register snapshot carried by PolicyStatsReport packets.
struct PolicyClassStats {
  int64_t feedback = 0;
  uint64_t feedback_events = 0;  // updates of either sign
  uint64_t latency_sum = 0;
  uint64_t requests = 0;
};

struct PolicyReportPayload {
  PolicyClassStats cls[3];  // indexed by SetClass
};

struct Packet {
  uint64_t id = 0;
  RequestKind kind = RequestKind::MemRead;
  VaultId from = kNoVault;
  VaultId to = kNoVault;
  BlockAddr addr = 0;
  bool dirty = false;
  uint32_t flits = 1;
  Cycle issue_cycle = 0;
  // Requester that originated the memory access; kept on forwarded packets so
  // a reply can be addressed directly.
  VaultId requester = kNoVault;
  RequestId request_id = kNoRequest;
  uint64_t payload = 0;    // block payload for data-carrying packets
  uint64_t write_id = 0;   // identity of the write a MemWrite commits
  VaultId served_by = kNoVault;  // vault whose array satisfied the request
  LatencyTally tally;
  uint32_t hops = 0;       // hops traversed so far
  Cycle net_ready = 0;     // network bookkeeping: eligible-to-move-since cycle
  Vc vc = Vc::Request;
  bool has_report = false;
  PolicyReportPayload report{};
};

class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

class TraceError : public std::runtime_error {
 public:
  explicit TraceError(const std::string& what) : std::runtime_error(what) {}
};

class SimError : public std::runtime_error {
 public:
  explicit SimError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace dlpim
