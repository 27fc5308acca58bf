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

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "dlpim/types.hpp"

namespace dlpim {

enum class PolicyKind : uint8_t {
  AlwaysOn,
  AlwaysOff,
  HopsAdaptive,
  LatencyAdaptive,
};

PolicyKind parse_policy(const std::string& name);
const char* to_string(PolicyKind kind);

// When a remote write hits a subscribed block the original vault forwards the
// data to the holder; the requester can be acknowledged as soon as the
// forward leaves (AfterForwardSent) or only once the holder commits.
enum class WriteAckMode : uint8_t { AfterForwardSent, AfterCommit };

struct GeneratorSpec {
  std::string name;                         // uniform|zipf|hotspot|stream|single_consumer
  std::map<std::string, std::string> params;

  static GeneratorSpec parse(const std::string& text);  // name:k=v,k=v
  std::string to_string() const;
};

struct SimConfig {
  // topology
  std::string preset = "hmc6x6";            // or "custom"
  uint32_t grid_rows = 0;                   // custom only
  uint32_t grid_cols = 0;
  std::string vault_coords;                 // custom only: "r,c;r,c;..."

  // memory
  uint32_t block_bytes = 64;                // 16|32|64|128
  uint32_t t_array = 45;                    // array access latency in cycles

  // subscription table / buffer
  uint32_t table_sets = 2048;
  uint32_t table_ways = 4;
  uint32_t buffer_entries = 32;

  // policy
  PolicyKind policy = PolicyKind::AlwaysOff;
  Cycle epoch_cycles = 1'000'000;
  double latency_threshold = 0.02;
  Cycle central_decision_latency = 1000;
  bool sampling = false;
  uint32_t leader_stride = 64;
  uint32_t bootstrap_epochs = 1;
  bool global_decisions = true;             // false: per-vault local decisions
  bool subscribe_on_write = true;
  WriteAckMode write_ack = WriteAckMode::AfterForwardSent;

  // trace source (exactly one must be set before a run)
  std::string trace_file;
  std::string trace_gen;  // generator mini-spec, e.g. "hotspot:p=0.8,n=100000"

  // engine
  uint64_t warmup_requests = 1'000'000;
  uint32_t max_outstanding = 1;
  uint64_t seed = 1;
  bool l1_enabled = false;
  uint32_t l1_bytes = 32 * 1024;
  uint32_t l1_ways = 8;
  Cycle max_cycles = 0;                     // 0 = unlimited
  bool audit_enabled = true;
  bool request_log = false;                 // per-request records (tests)
  bool commit_log = false;                  // write commit order (tests)

  // Test hook: at each listed cycle the central vault broadcasts a forced
  // TurnOn/TurnOffSubscription to every vault, regardless of policy kind.
  std::vector<std::pair<Cycle, bool>> forced_policy_flips;

  uint32_t data_flits() const { return block_bytes / 16 + 1; }

  // Applies "section.key" (or bare "key") overrides; unknown keys throw.
  void apply(const std::string& key, const std::string& value);
  void validate() const;
};

// Flat key=value file with optional [section] headers and '#' comments.
SimConfig load_config_file(const std::string& path, SimConfig base = {});

class Topology;
// Builds the preset topology, or the custom grid described by rows/cols and
// the "r,c;r,c;..." vault_coords list.
Topology build_topology(const SimConfig& cfg);

}  // namespace dlpim
