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

#include "dlpim/config.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

#include "dlpim/topology.hpp"

namespace dlpim {

namespace {

std::string trim(const std::string& s) {
  size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

uint64_t parse_u64(const std::string& key, const std::string& value) {
  try {
    size_t pos = 0;
    const uint64_t v = std::stoull(value, &pos);
    if (pos != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("bad integer for '" + key + "': '" + value + "'");
  }
}

double parse_double(const std::string& key, const std::string& value) {
  try {
    size_t pos = 0;
    const double v = std::stod(value, &pos);
    if (pos != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("bad number for '" + key + "': '" + value + "'");
  }
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1" || value == "on" || value == "yes") return true;
  if (value == "false" || value == "0" || value == "off" || value == "no") return false;
  throw ConfigError("bad boolean for '" + key + "': '" + value + "'");
}

}  // namespace

PolicyKind parse_policy(const std::string& name) {
  if (name == "always-on" || name == "always_on") return PolicyKind::AlwaysOn;
  if (name == "always-off" || name == "always_off") return PolicyKind::AlwaysOff;
  if (name == "hops-adaptive" || name == "hops_adaptive") return PolicyKind::HopsAdaptive;
  if (name == "latency-adaptive" || name == "latency_adaptive") return PolicyKind::LatencyAdaptive;
  throw ConfigError("unknown policy '" + name + "'");
}

const char* to_string(PolicyKind kind) {
  switch (kind) {
    case PolicyKind::AlwaysOn: return "always-on";
    case PolicyKind::AlwaysOff: return "always-off";
    case PolicyKind::HopsAdaptive: return "hops-adaptive";
    case PolicyKind::LatencyAdaptive: return "latency-adaptive";
  }
  return "?";
}

GeneratorSpec GeneratorSpec::parse(const std::string& text) {
  GeneratorSpec spec;
  const size_t colon = text.find(':');
  spec.name = trim(text.substr(0, colon));
  if (spec.name.empty()) throw ConfigError("empty generator name");
  if (colon == std::string::npos) return spec;
  std::stringstream rest(text.substr(colon + 1));
  std::string item;
  while (std::getline(rest, item, ',')) {
    item = trim(item);
    if (item.empty()) continue;
    const size_t eq = item.find('=');
    if (eq == std::string::npos)
      throw ConfigError("generator parameter '" + item + "' is not key=value");
    spec.params[trim(item.substr(0, eq))] = trim(item.substr(eq + 1));
  }
  return spec;
}

std::string GeneratorSpec::to_string() const {
  std::string out = name;
  char sep = ':';
  for (const auto& [k, v] : params) {
    out += sep;
    out += k + "=" + v;
    sep = ',';
  }
  return out;
}

void SimConfig::apply(const std::string& key, const std::string& value) {
  // Section prefixes are cosmetic; match on the final component.
  std::string k = key;
  const size_t dot = k.rfind('.');
  if (dot != std::string::npos) k = k.substr(dot + 1);

  if (k == "preset") preset = value;
  else if (k == "rows") grid_rows = static_cast<uint32_t>(parse_u64(k, value));
  else if (k == "cols") grid_cols = static_cast<uint32_t>(parse_u64(k, value));
  else if (k == "vault_coords") vault_coords = value;
  else if (k == "block_bytes") block_bytes = static_cast<uint32_t>(parse_u64(k, value));
  else if (k == "t_array") t_array = static_cast<uint32_t>(parse_u64(k, value));
  else if (k == "sets" || k == "table_sets") table_sets = static_cast<uint32_t>(parse_u64(k, value));
  else if (k == "ways" || k == "table_ways") table_ways = static_cast<uint32_t>(parse_u64(k, value));
  else if (k == "buffer_entries") buffer_entries = static_cast<uint32_t>(parse_u64(k, value));
  else if (k == "kind" || k == "policy") policy = parse_policy(value);
  else if (k == "epoch_cycles") epoch_cycles = parse_u64(k, value);
  else if (k == "latency_threshold" || k == "threshold") latency_threshold = parse_double(k, value);
  else if (k == "central_decision_latency") central_decision_latency = parse_u64(k, value);
  else if (k == "sampling") sampling = parse_bool(k, value);
  else if (k == "leader_stride") leader_stride = static_cast<uint32_t>(parse_u64(k, value));
  else if (k == "bootstrap_epochs") bootstrap_epochs = static_cast<uint32_t>(parse_u64(k, value));
  else if (k == "global_decisions") global_decisions = parse_bool(k, value);
  else if (k == "subscribe_on_write") subscribe_on_write = parse_bool(k, value);
  else if (k == "write_ack") {
    if (value == "after_forward") write_ack = WriteAckMode::AfterForwardSent;
    else if (value == "after_commit") write_ack = WriteAckMode::AfterCommit;
    else throw ConfigError("bad write_ack '" + value + "' (after_forward|after_commit)");
  }
  else if (k == "file" || k == "trace_file") trace_file = value;
  else if (k == "gen" || k == "trace_gen") trace_gen = value;
  else if (k == "warmup_requests" || k == "warmup") warmup_requests = parse_u64(k, value);
  else if (k == "max_outstanding") max_outstanding = static_cast<uint32_t>(parse_u64(k, value));
  else if (k == "seed") seed = parse_u64(k, value);
  else if (k == "l1_enabled" || k == "l1") l1_enabled = parse_bool(k, value);
  else if (k == "l1_bytes") l1_bytes = static_cast<uint32_t>(parse_u64(k, value));
  else if (k == "l1_ways") l1_ways = static_cast<uint32_t>(parse_u64(k, value));
  else if (k == "max_cycles") max_cycles = parse_u64(k, value);
  else if (k == "audit") audit_enabled = parse_bool(k, value);
  else if (k == "request_log") request_log = parse_bool(k, value);
  else if (k == "commit_log") commit_log = parse_bool(k, value);
  else throw ConfigError("unknown config key '" + key + "'");
}

void SimConfig::validate() const {
  if (block_bytes != 16 && block_bytes != 32 && block_bytes != 64 && block_bytes != 128)
    throw ConfigError("block_bytes must be one of 16, 32, 64, 128");
  if (table_sets == 0 || table_ways == 0)
    throw ConfigError("subscription table geometry must be non-zero");
  if (buffer_entries == 0) throw ConfigError("buffer_entries must be > 0");
  if (max_outstanding == 0) throw ConfigError("max_outstanding must be > 0");
  if (epoch_cycles <= central_decision_latency)
    throw ConfigError("epoch_cycles must exceed central_decision_latency");
  if (latency_threshold < 0.0)
    throw ConfigError("latency_threshold must be >= 0");
  if (leader_stride < 2) throw ConfigError("leader_stride must be >= 2");
  if (preset == "custom" && (grid_rows == 0 || grid_cols == 0 || vault_coords.empty()))
    throw ConfigError("custom topology needs rows, cols and vault_coords");
  if (l1_enabled) {
    if (l1_ways == 0 || l1_bytes == 0 || l1_bytes % (l1_ways * block_bytes) != 0)
      throw ConfigError("l1_bytes must be a multiple of l1_ways * block_bytes");
  }
}

Topology build_topology(const SimConfig& cfg) {
  if (cfg.preset != "custom") return Topology::preset(cfg.preset);
  std::vector<Coord> coords;
  std::stringstream ss(cfg.vault_coords);
  std::string item;
  while (std::getline(ss, item, ';')) {
    const size_t comma = item.find(',');
    if (comma == std::string::npos)
      throw ConfigError("vault_coords: expected 'row,col' pairs separated by ';'");
    try {
      coords.push_back({static_cast<uint32_t>(std::stoul(item.substr(0, comma))),
                        static_cast<uint32_t>(std::stoul(item.substr(comma + 1)))});
    } catch (const std::exception&) {
      throw ConfigError("vault_coords: bad coordinate '" + item + "'");
    }
  }
  return Topology::custom(cfg.grid_rows, cfg.grid_cols, std::move(coords));
}

SimConfig load_config_file(const std::string& path, SimConfig base) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::string line;
  std::string section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[' && line.back() == ']') {
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(path + ":" + std::to_string(lineno) + ": expected key = value");
    std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (!section.empty()) key = section + "." + key;
    try {
      base.apply(key, value);
    } catch (const ConfigError& e) {
      throw ConfigError(path + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return base;
}

}  // namespace dlpim
