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

#include "dlpim/adaptive.hpp"

namespace dlpim {

std::vector<SetClass> assign_set_classes(uint32_t sets, uint32_t stride,
                                         bool sampling) {
  std::vector<SetClass> classes(sets, SetClass::Normal);
  if (!sampling) return classes;
  const uint32_t per_class_cap = sets >= 2 * stride ? 32 : 1;
  uint32_t on = 0, off = 0;
  for (uint32_t s = 0; s < sets; ++s) {
    if (s % stride == 0 && on < per_class_cap) {
      classes[s] = SetClass::AlwaysOnLeader;
      ++on;
    } else if (s % stride == 1 && off < per_class_cap) {
      classes[s] = SetClass::AlwaysOffLeader;
      ++off;
    }
  }
  // Degenerate tables: force at least one leader of each class.
  if (on == 0 && sets >= 1) classes[0] = SetClass::AlwaysOnLeader;
  if (off == 0 && sets >= 2) classes[1] = SetClass::AlwaysOffLeader;
  return classes;
}

void CentralPolicy::configure(const SimConfig& cfg, uint32_t vault_count) {
  kind_ = cfg.policy;
  sampling_ = cfg.sampling;
  threshold_ = cfg.latency_threshold;
  bootstrap_epochs_ = cfg.bootstrap_epochs;
  vault_count_ = vault_count;
  start_epoch_collection();
}

void CentralPolicy::start_epoch_collection() {
  for (auto& s : sums_) s = PolicyClassStats{};
  reports_in_ = 0;
}

void CentralPolicy::absorb_report(const PolicyReportPayload& report) {
  for (size_t i = 0; i < 3; ++i) {
    sums_[i].feedback += report.cls[i].feedback;
    sums_[i].feedback_events += report.cls[i].feedback_events;
    sums_[i].latency_sum += report.cls[i].latency_sum;
    sums_[i].requests += report.cls[i].requests;
  }
  ++reports_in_;
}

bool CentralPolicy::decide_hops(const PolicyClassStats sums[3], bool sampling,
                                bool current_on) {
  if (sampling) {
    const auto& on = sums[static_cast<size_t>(SetClass::AlwaysOnLeader)];
    const auto& off = sums[static_cast<size_t>(SetClass::AlwaysOffLeader)];
    if (on.feedback_events == 0 && off.feedback_events == 0) return current_on;
    if (on.feedback == off.feedback) return current_on;
    return on.feedback > off.feedback;
  }
  int64_t total = 0;
  uint64_t events = 0;
  for (size_t i = 0; i < 3; ++i) {
    total += sums[i].feedback;
    events += sums[i].feedback_events;
  }
  // An epoch with no subscribed traffic carries no signal; without leader
  // sampling the policy simply stays where it is.
  if (events == 0) return current_on;
  return total >= 0;  // zero is the optimistic tie
}

bool CentralPolicy::decide_latency(const PolicyClassStats sums[3], bool sampling,
                                   bool current_on, double threshold,
                                   bool prev_valid, double prev_avg,
                                   double* new_avg_out) {
  if (sampling) {
    const auto& on = sums[static_cast<size_t>(SetClass::AlwaysOnLeader)];
    const auto& off = sums[static_cast<size_t>(SetClass::AlwaysOffLeader)];
    if (on.requests == 0 || off.requests == 0) return current_on;
    const double on_avg = static_cast<double>(on.latency_sum) / static_cast<double>(on.requests);
    const double off_avg = static_cast<double>(off.latency_sum) / static_cast<double>(off.requests);
    return on_avg <= off_avg;
  }
  uint64_t lat = 0, req = 0;
  for (size_t i = 0; i < 3; ++i) {
    lat += sums[i].latency_sum;
    req += sums[i].requests;
  }
  if (req == 0) return current_on;  // no requests, nothing to compare
  const double avg = static_cast<double>(lat) / static_cast<double>(req);
  if (new_avg_out) *new_avg_out = avg;
  if (!prev_valid) return current_on;
  // Keep the policy while latency stays at or under (1 + threshold) of the
  // previous epoch; flip once it degrades past that.
  return avg <= prev_avg * (1.0 + threshold) ? current_on : !current_on;
}

bool CentralPolicy::decide(uint64_t epoch, bool current_on) {
  bool next = current_on;
  if (kind_ == PolicyKind::HopsAdaptive || epoch <= bootstrap_epochs_) {
    // Latency mode bootstraps on the hops signal until it has a previous
    // epoch to compare against.
    next = decide_hops(sums_, sampling_, current_on);
    if (kind_ == PolicyKind::LatencyAdaptive) {
      double avg = 0.0;
      uint64_t lat = 0, req = 0;
      for (size_t i = 0; i < 3; ++i) {
        lat += sums_[i].latency_sum;
        req += sums_[i].requests;
      }
      if (req > 0) {
        avg = static_cast<double>(lat) / static_cast<double>(req);
        prev_avg_ = avg;
        prev_avg_valid_ = true;
      }
    }
  } else if (kind_ == PolicyKind::LatencyAdaptive) {
    double new_avg = prev_avg_;
    next = decide_latency(sums_, sampling_, current_on, threshold_,
                          prev_avg_valid_, prev_avg_, &new_avg);
    uint64_t req = 0;
    for (size_t i = 0; i < 3; ++i) req += sums_[i].requests;
    if (req > 0) {
      prev_avg_ = new_avg;
      prev_avg_valid_ = true;
    }
  }
  start_epoch_collection();
  return next;
}

}  // namespace dlpim
