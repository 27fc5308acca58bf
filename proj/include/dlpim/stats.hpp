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

#include <string>
#include <vector>

#include "dlpim/config.hpp"
#include "dlpim/types.hpp"

namespace dlpim {

// Population coefficient of variation (sigma / mu); zero when the mean is 0.
double cov(const std::vector<uint64_t>& counts);

struct EpochPolicySample {
  uint64_t epoch = 0;
  bool subscribe_on = false;
};

struct StatsReport {
  uint32_t schema_version = 1;

  // provenance
  std::string preset;
  std::string policy;
  uint64_t seed = 0;
  uint32_t block_bytes = 0;
  uint32_t t_array = 0;
  uint32_t table_sets = 0;
  uint32_t table_ways = 0;

  uint64_t total_cycles = 0;
  uint64_t requests_issued = 0;
  uint64_t requests_completed = 0;
  uint64_t reads = 0;
  uint64_t writes = 0;

  // latency ledger (post-warmup completions)
  uint64_t network_cycles = 0;
  uint64_t queuing_cycles = 0;
  uint64_t array_cycles = 0;
  uint64_t total_latency = 0;

  std::vector<uint64_t> vault_serves;  // per-vault array-touching serves
  double cov_serves = 0.0;

  uint64_t flit_hops = 0;        // sum of flits over completed hops
  uint64_t injected_flits = 0;   // sum of flits over injected packets
  double bytes_per_cycle = 0.0;  // hop-weighted: flit_hops * 16 / cycles
  double bytes_per_cycle_injected = 0.0;

  uint64_t subscriptions_attempted = 0;
  uint64_t subscriptions_completed = 0;
  uint64_t subscriptions_nacked = 0;
  uint64_t resubscriptions = 0;
  uint64_t unsubscriptions = 0;

  uint64_t reuse_tenures = 0;
  uint64_t reuse_local = 0;
  uint64_t reuse_remote = 0;

  std::vector<uint64_t> max_service_queue;  // per-vault peak occupancy
  std::vector<EpochPolicySample> epochs;

  double avg_latency() const {
    return requests_completed == 0
               ? 0.0
               : static_cast<double>(total_latency) / static_cast<double>(requests_completed);
  }
  double avg_reuse_local() const {
    return reuse_tenures == 0
               ? 0.0
               : static_cast<double>(reuse_local) / static_cast<double>(reuse_tenures);
  }
  double avg_reuse_remote() const {
    return reuse_tenures == 0
               ? 0.0
               : static_cast<double>(reuse_remote) / static_cast<double>(reuse_tenures);
  }
};

// Execution-time ratio of a baseline run over a candidate run of the same
// trace; > 1 means the candidate finished faster.
double speedup(const StatsReport& baseline, const StatsReport& candidate);

std::string to_json(const StatsReport& report);
std::string to_csv(const StatsReport& report);
StatsReport report_from_json(const std::string& text);

void write_report(const std::string& path, const StatsReport& report,
                  const std::string& format);  // "json" or "csv"

}  // namespace dlpim
