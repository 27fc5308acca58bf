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

#include "dlpim/stats.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace dlpim {

using ordered_json = nlohmann::ordered_json;

double cov(const std::vector<uint64_t>& counts) {
  if (counts.empty()) return 0.0;
  double sum = 0.0;
  for (uint64_t c : counts) sum += static_cast<double>(c);
  const double mean = sum / static_cast<double>(counts.size());
  if (mean == 0.0) return 0.0;
  double var = 0.0;
  for (uint64_t c : counts) {
    const double d = static_cast<double>(c) - mean;
    var += d * d;
  }
  var /= static_cast<double>(counts.size());
  return std::sqrt(var) / mean;
}

double speedup(const StatsReport& baseline, const StatsReport& candidate) {
  if (candidate.total_cycles == 0)
    throw SimError("speedup: candidate run has zero cycles");
  return static_cast<double>(baseline.total_cycles) /
         static_cast<double>(candidate.total_cycles);
}

namespace {

ordered_json report_to_ojson(const StatsReport& r) {
  ordered_json j;
  j["schema_version"] = r.schema_version;
  j["config"] = {
      {"preset", r.preset},       {"policy", r.policy},
      {"seed", r.seed},           {"block_bytes", r.block_bytes},
      {"t_array", r.t_array},     {"table_sets", r.table_sets},
      {"table_ways", r.table_ways},
  };
  j["cycles"] = r.total_cycles;
  j["requests"] = {
      {"issued", r.requests_issued},
      {"completed", r.requests_completed},
      {"reads", r.reads},
      {"writes", r.writes},
  };
  j["latency"] = {
      {"network", r.network_cycles},
      {"queuing", r.queuing_cycles},
      {"array", r.array_cycles},
      {"total", r.total_latency},
      {"avg_total", r.avg_latency()},
  };
  j["vault_serves"] = r.vault_serves;
  j["cov_serves"] = r.cov_serves;
  j["traffic"] = {
      {"flit_hops", r.flit_hops},
      {"injected_flits", r.injected_flits},
      {"bytes_per_cycle", r.bytes_per_cycle},
      {"bytes_per_cycle_injected", r.bytes_per_cycle_injected},
  };
  j["subscriptions"] = {
      {"attempted", r.subscriptions_attempted},
      {"completed", r.subscriptions_completed},
      {"nacked", r.subscriptions_nacked},
      {"resubscriptions", r.resubscriptions},
      {"unsubscriptions", r.unsubscriptions},
  };
  j["reuse"] = {
      {"tenures", r.reuse_tenures},
      {"local", r.reuse_local},
      {"remote", r.reuse_remote},
      {"avg_local", r.avg_reuse_local()},
      {"avg_remote", r.avg_reuse_remote()},
  };
  j["max_service_queue"] = r.max_service_queue;
  ordered_json epochs = ordered_json::array();
  for (const EpochPolicySample& e : r.epochs)
    epochs.push_back({{"epoch", e.epoch}, {"subscribe_on", e.subscribe_on}});
  j["epochs"] = std::move(epochs);
  return j;
}

}  // namespace

std::string to_json(const StatsReport& report) {
  return report_to_ojson(report).dump(2) + "\n";
}

StatsReport report_from_json(const std::string& text) {
  const ordered_json j = ordered_json::parse(text);
  StatsReport r;
  r.schema_version = j.at("schema_version").get<uint32_t>();
  const auto& cfg = j.at("config");
  r.preset = cfg.at("preset").get<std::string>();
  r.policy = cfg.at("policy").get<std::string>();
  r.seed = cfg.at("seed").get<uint64_t>();
  r.block_bytes = cfg.at("block_bytes").get<uint32_t>();
  r.t_array = cfg.at("t_array").get<uint32_t>();
  r.table_sets = cfg.at("table_sets").get<uint32_t>();
  r.table_ways = cfg.at("table_ways").get<uint32_t>();
  r.total_cycles = j.at("cycles").get<uint64_t>();
  const auto& req = j.at("requests");
  r.requests_issued = req.at("issued").get<uint64_t>();
  r.requests_completed = req.at("completed").get<uint64_t>();
  r.reads = req.at("reads").get<uint64_t>();
  r.writes = req.at("writes").get<uint64_t>();
  const auto& lat = j.at("latency");
  r.network_cycles = lat.at("network").get<uint64_t>();
  r.queuing_cycles = lat.at("queuing").get<uint64_t>();
  r.array_cycles = lat.at("array").get<uint64_t>();
  r.total_latency = lat.at("total").get<uint64_t>();
  r.vault_serves = j.at("vault_serves").get<std::vector<uint64_t>>();
  r.cov_serves = j.at("cov_serves").get<double>();
  const auto& traffic = j.at("traffic");
  r.flit_hops = traffic.at("flit_hops").get<uint64_t>();
  r.injected_flits = traffic.at("injected_flits").get<uint64_t>();
  r.bytes_per_cycle = traffic.at("bytes_per_cycle").get<double>();
  r.bytes_per_cycle_injected = traffic.at("bytes_per_cycle_injected").get<double>();
  const auto& subs = j.at("subscriptions");
  r.subscriptions_attempted = subs.at("attempted").get<uint64_t>();
  r.subscriptions_completed = subs.at("completed").get<uint64_t>();
  r.subscriptions_nacked = subs.at("nacked").get<uint64_t>();
  r.resubscriptions = subs.at("resubscriptions").get<uint64_t>();
  r.unsubscriptions = subs.at("unsubscriptions").get<uint64_t>();
  const auto& reuse = j.at("reuse");
  r.reuse_tenures = reuse.at("tenures").get<uint64_t>();
  r.reuse_local = reuse.at("local").get<uint64_t>();
  r.reuse_remote = reuse.at("remote").get<uint64_t>();
  r.max_service_queue = j.at("max_service_queue").get<std::vector<uint64_t>>();
  for (const auto& e : j.at("epochs"))
    r.epochs.push_back({e.at("epoch").get<uint64_t>(), e.at("subscribe_on").get<bool>()});
  return r;
}

std::string to_csv(const StatsReport& r) {
  std::ostringstream out;
  out << "metric,value\n";
  const auto put = [&](const std::string& name, const auto& value) {
    out << name << ',' << value << '\n';
  };
  put("schema_version", r.schema_version);
  put("preset", r.preset);
  put("policy", r.policy);
  put("seed", r.seed);
  put("block_bytes", r.block_bytes);
  put("t_array", r.t_array);
  put("table_sets", r.table_sets);
  put("table_ways", r.table_ways);
  put("cycles", r.total_cycles);
  put("requests_issued", r.requests_issued);
  put("requests_completed", r.requests_completed);
  put("reads", r.reads);
  put("writes", r.writes);
  put("latency_network", r.network_cycles);
  put("latency_queuing", r.queuing_cycles);
  put("latency_array", r.array_cycles);
  put("latency_total", r.total_latency);
  put("latency_avg_total", r.avg_latency());
  for (size_t v = 0; v < r.vault_serves.size(); ++v)
    put("vault_serves." + std::to_string(v), r.vault_serves[v]);
  put("cov_serves", r.cov_serves);
  put("traffic_flit_hops", r.flit_hops);
  put("traffic_injected_flits", r.injected_flits);
  put("traffic_bytes_per_cycle", r.bytes_per_cycle);
  put("traffic_bytes_per_cycle_injected", r.bytes_per_cycle_injected);
  put("subscriptions_attempted", r.subscriptions_attempted);
  put("subscriptions_completed", r.subscriptions_completed);
  put("subscriptions_nacked", r.subscriptions_nacked);
  put("resubscriptions", r.resubscriptions);
  put("unsubscriptions", r.unsubscriptions);
  put("reuse_tenures", r.reuse_tenures);
  put("reuse_local", r.reuse_local);
  put("reuse_remote", r.reuse_remote);
  put("reuse_avg_local", r.avg_reuse_local());
  put("reuse_avg_remote", r.avg_reuse_remote());
  for (size_t v = 0; v < r.max_service_queue.size(); ++v)
    put("max_service_queue." + std::to_string(v), r.max_service_queue[v]);
  for (const EpochPolicySample& e : r.epochs)
    put("epoch_policy." + std::to_string(e.epoch), e.subscribe_on ? 1 : 0);
  return out.str();
}

void write_report(const std::string& path, const StatsReport& report,
                  const std::string& format) {
  std::ofstream out(path);
  if (!out) throw SimError("cannot open report file '" + path + "'");
  if (format == "json") out << to_json(report);
  else if (format == "csv") out << to_csv(report);
  else throw ConfigError("unknown report format '" + format + "'");
  if (!out) throw SimError("write error in '" + path + "'");
}

}  // namespace dlpim
