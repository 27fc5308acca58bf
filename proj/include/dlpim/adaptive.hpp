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

#include <vector>

#include "dlpim/config.hpp"
#include "dlpim/types.hpp"

namespace dlpim {

// Set-dueling classes. Leader sets are pinned to one policy for the whole run
// so both alternatives stay observable; normal sets follow the broadcast
// decision.
enum class SetClass : uint8_t { Normal = 0, AlwaysOnLeader = 1, AlwaysOffLeader = 2 };

// Leader assignment by fixed stride: set s is an ON leader when
// s % stride == 0 and an OFF leader when s % stride == 1, capped at 32 sets
// per class. Tables smaller than 2 * stride fall back to one leader per
// class.
std::vector<SetClass> assign_set_classes(uint32_t sets, uint32_t stride,
                                         bool sampling);

// Per-vault policy accumulators, one copy per set class. Cleared at every
// epoch boundary so each decision only sees the previous epoch.
struct PolicyRegisters {
  PolicyClassStats cls[3];

  void clear() {
    for (auto& c : cls) c = PolicyClassStats{};
  }

  void add_feedback(SetClass sc, int delta) {
    auto& c = cls[static_cast<size_t>(sc)];
    c.feedback += delta;
    c.feedback_events += 1;
  }
  void add_latency(SetClass sc, uint64_t latency) {
    auto& c = cls[static_cast<size_t>(sc)];
    c.latency_sum += latency;
    c.requests += 1;
  }

  PolicyReportPayload snapshot() const {
    PolicyReportPayload p;
    for (size_t i = 0; i < 3; ++i) p.cls[i] = cls[i];
    return p;
  }
};

// Aggregated decision state kept at the central vault.
class CentralPolicy {
 public:
  void configure(const SimConfig& cfg, uint32_t vault_count);

  void start_epoch_collection();
  void absorb_report(const PolicyReportPayload& report);
  bool all_reports_in() const { return reports_in_ >= vault_count_; }
  uint32_t reports_in() const { return reports_in_; }

  // Applies the configured policy rule to the collected sums and returns the
  // normal-set policy for the next epoch. `epoch` is the 1-based index of the
  // epoch the collected data describes.
  bool decide(uint64_t epoch, bool current_on);

  // Pure decision rules, shared with the per-vault local mode.
  static bool decide_hops(const PolicyClassStats sums[3], bool sampling,
                          bool current_on);
  static bool decide_latency(const PolicyClassStats sums[3], bool sampling,
                             bool current_on, double threshold,
                             bool prev_valid, double prev_avg,
                             double* new_avg_out);

 private:
  PolicyKind kind_ = PolicyKind::AlwaysOff;
  bool sampling_ = false;
  double threshold_ = 0.02;
  uint32_t bootstrap_epochs_ = 1;
  uint32_t vault_count_ = 0;

  PolicyClassStats sums_[3];
  uint32_t reports_in_ = 0;
  bool prev_avg_valid_ = false;
  double prev_avg_ = 0.0;
};

}  // namespace dlpim
