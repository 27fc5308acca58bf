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

#include "dlpim/trace.hpp"

#include <zlib.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>

#include "dlpim/rng.hpp"

namespace dlpim {

namespace {

bool has_gz_suffix(const std::string& path) {
  return path.size() > 3 && path.compare(path.size() - 3, 3, ".gz") == 0;
}

TraceRecord parse_line(const std::string& line, const std::string& path, int lineno) {
  std::istringstream ss(line);
  std::string delta_s, core_s, op_s, addr_s;
  if (!(ss >> delta_s >> core_s >> op_s >> addr_s)) {
    throw TraceError(path + ":" + std::to_string(lineno) +
                     ": expected '<delta> <core> R|W <addr>'");
  }
  std::string extra;
  if (ss >> extra) {
    throw TraceError(path + ":" + std::to_string(lineno) + ": trailing token '" + extra + "'");
  }
  TraceRecord rec;
  try {
    size_t pos = 0;
    rec.delta = std::stoull(delta_s, &pos);
    if (pos != delta_s.size()) throw std::invalid_argument(delta_s);
    rec.core = static_cast<uint32_t>(std::stoul(core_s, &pos));
    if (pos != core_s.size()) throw std::invalid_argument(core_s);
    rec.addr = std::stoull(addr_s, &pos, 0);
    if (pos != addr_s.size()) throw std::invalid_argument(addr_s);
  } catch (const std::exception&) {
    throw TraceError(path + ":" + std::to_string(lineno) + ": malformed field in '" + line + "'");
  }
  if (op_s == "R" || op_s == "r") rec.op = Op::Read;
  else if (op_s == "W" || op_s == "w") rec.op = Op::Write;
  else throw TraceError(path + ":" + std::to_string(lineno) + ": op must be R or W, got '" + op_s + "'");
  return rec;
}

void for_each_line(const std::string& path, const std::function<void(const std::string&, int)>& fn) {
  if (has_gz_suffix(path)) {
    gzFile gz = gzopen(path.c_str(), "rb");
    if (!gz) throw TraceError("cannot open trace file '" + path + "'");
    char buf[1 << 16];
    std::string pending;
    int lineno = 0;
    int n;
    while ((n = gzread(gz, buf, sizeof(buf))) > 0) {
      pending.append(buf, static_cast<size_t>(n));
      size_t start = 0, nl;
      while ((nl = pending.find('\n', start)) != std::string::npos) {
        fn(pending.substr(start, nl - start), ++lineno);
        start = nl + 1;
      }
      pending.erase(0, start);
    }
    if (n < 0) {
      gzclose(gz);
      throw TraceError("gzip read error in '" + path + "'");
    }
    gzclose(gz);
    if (!pending.empty()) fn(pending, ++lineno);
    return;
  }
  std::ifstream in(path);
  if (!in) throw TraceError("cannot open trace file '" + path + "'");
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) fn(line, ++lineno);
}

uint64_t gen_u64(const GeneratorSpec& spec, const std::string& key, uint64_t def) {
  const auto it = spec.params.find(key);
  if (it == spec.params.end()) return def;
  try {
    size_t pos = 0;
    const uint64_t v = std::stoull(it->second, &pos);
    if (pos != it->second.size()) throw std::invalid_argument(it->second);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("generator '" + spec.name + "': bad integer " + key + "='" + it->second + "'");
  }
}

double gen_double(const GeneratorSpec& spec, const std::string& key, double def) {
  const auto it = spec.params.find(key);
  if (it == spec.params.end()) return def;
  try {
    size_t pos = 0;
    const double v = std::stod(it->second, &pos);
    if (pos != it->second.size()) throw std::invalid_argument(it->second);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("generator '" + spec.name + "': bad number " + key + "='" + it->second + "'");
  }
}

void check_params(const GeneratorSpec& spec, std::initializer_list<const char*> allowed) {
  for (const auto& [k, _] : spec.params) {
    bool ok = false;
    for (const char* a : allowed)
      if (k == a) { ok = true; break; }
    if (!ok) throw ConfigError("generator '" + spec.name + "': unknown parameter '" + k + "'");
  }
}

}  // namespace

std::vector<TraceRecord> load_trace(const std::string& path) {
  std::vector<TraceRecord> out;
  for_each_line(path, [&](const std::string& raw, int lineno) {
    std::string line = raw;
    const size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    bool blank = true;
    for (char c : line)
      if (!std::isspace(static_cast<unsigned char>(c))) { blank = false; break; }
    if (blank) return;
    out.push_back(parse_line(line, path, lineno));
  });
  return out;
}

void write_trace(const std::string& path, const std::vector<TraceRecord>& records) {
  std::string body;
  body.reserve(records.size() * 24);
  char line[80];
  for (const TraceRecord& r : records) {
    std::snprintf(line, sizeof(line), "%llu %u %c 0x%llx\n",
                  static_cast<unsigned long long>(r.delta), r.core,
                  r.op == Op::Read ? 'R' : 'W',
                  static_cast<unsigned long long>(r.addr));
    body += line;
  }
  if (has_gz_suffix(path)) {
    gzFile gz = gzopen(path.c_str(), "wb");
    if (!gz) throw TraceError("cannot open '" + path + "' for writing");
    if (gzwrite(gz, body.data(), static_cast<unsigned>(body.size())) !=
        static_cast<int>(body.size())) {
      gzclose(gz);
      throw TraceError("gzip write error in '" + path + "'");
    }
    gzclose(gz);
    return;
  }
  std::ofstream out(path);
  if (!out) throw TraceError("cannot open '" + path + "' for writing");
  out << body;
  if (!out) throw TraceError("write error in '" + path + "'");
}

std::vector<TraceRecord> generate_trace(const GeneratorSpec& spec, const Topology& topo,
                                        uint32_t block_bytes, uint64_t seed) {
  const uint64_t vaults = topo.vault_count();
  Rng rng(seed ^ 0x9E3779B97F4A7C15ull);
  std::vector<TraceRecord> out;

  const auto addr_of = [&](uint64_t block) { return block * block_bytes; };
  const auto pick_op = [&](double write_frac) {
    return rng.chance(write_frac) ? Op::Write : Op::Read;
  };

  if (spec.name == "uniform") {
    check_params(spec, {"n", "blocks", "write_frac", "delta"});
    const uint64_t n = gen_u64(spec, "n", 100'000);
    const uint64_t blocks = gen_u64(spec, "blocks", 256 * vaults);
    const double wf = gen_double(spec, "write_frac", 0.2);
    const uint64_t delta = gen_u64(spec, "delta", 0);
    if (blocks == 0) throw ConfigError("uniform: blocks must be > 0");
    out.reserve(n);
    for (uint64_t i = 0; i < n; ++i) {
      out.push_back({delta, static_cast<uint32_t>(i % vaults), pick_op(wf),
                     addr_of(rng.below(blocks))});
    }
    return out;
  }

  if (spec.name == "zipf") {
    check_params(spec, {"n", "blocks", "s", "write_frac", "delta"});
    const uint64_t n = gen_u64(spec, "n", 100'000);
    const uint64_t blocks = gen_u64(spec, "blocks", 256 * vaults);
    const double s = gen_double(spec, "s", 1.0);
    const double wf = gen_double(spec, "write_frac", 0.2);
    const uint64_t delta = gen_u64(spec, "delta", 0);
    if (s <= 0.0) throw ConfigError("zipf: exponent s must be > 0");
    if (blocks == 0) throw ConfigError("zipf: blocks must be > 0");
    std::vector<double> cdf(blocks);
    double acc = 0.0;
    for (uint64_t r = 0; r < blocks; ++r) {
      acc += 1.0 / std::pow(static_cast<double>(r + 1), s);
      cdf[r] = acc;
    }
    for (double& c : cdf) c /= acc;
    out.reserve(n);
    for (uint64_t i = 0; i < n; ++i) {
      const double u = rng.unit();
      const auto it = std::lower_bound(cdf.begin(), cdf.end(), u);
      const uint64_t rank = static_cast<uint64_t>(it - cdf.begin());
      // Spread popular ranks across homes instead of clustering at vault 0.
      const uint64_t block = rank * 2654435761u % blocks;
      out.push_back({delta, static_cast<uint32_t>(i % vaults), pick_op(wf), addr_of(block)});
    }
    return out;
  }

  if (spec.name == "hotspot") {
    check_params(spec, {"n", "p", "hot_vault", "hot_blocks", "cold_blocks",
                        "burst", "write_frac", "delta"});
    const uint64_t n = gen_u64(spec, "n", 100'000);
    const double p = gen_double(spec, "p", 0.8);
    const uint64_t hot_vault = gen_u64(spec, "hot_vault", 0);
    const uint64_t hot_blocks = gen_u64(spec, "hot_blocks", 1024);
    const uint64_t cold_blocks = gen_u64(spec, "cold_blocks", 8192);
    const uint64_t burst = gen_u64(spec, "burst", 8);
    const double wf = gen_double(spec, "write_frac", 0.2);
    const uint64_t delta = gen_u64(spec, "delta", 0);
    if (p < 0.0 || p > 1.0) throw ConfigError("hotspot: p must be in [0,1]");
    if (hot_vault >= vaults) throw ConfigError("hotspot: hot_vault out of range");
    if (hot_blocks == 0 || cold_blocks == 0)
      throw ConfigError("hotspot: block pools must be > 0");
    // Hot pool: blocks homed at hot_vault. Cold pool: disjoint region whose
    // homes cycle over all vaults. Cores revisit their current block for
    // `burst` accesses (hot or cold alike, keeping the hot fraction at p),
    // which gives a subscription something to earn.
    struct BurstState { uint64_t block = 0; uint64_t left = 0; };
    std::vector<BurstState> st(vaults);
    out.reserve(n);
    for (uint64_t i = 0; i < n; ++i) {
      const uint32_t core = static_cast<uint32_t>(i % vaults);
      BurstState& b = st[core];
      uint64_t block;
      if (b.left > 0) {
        block = b.block;
        --b.left;
      } else {
        block = rng.chance(p) ? hot_vault + rng.below(hot_blocks) * vaults
                              : hot_blocks * vaults + rng.below(cold_blocks);
        b.block = block;
        b.left = burst > 0 ? burst - 1 : 0;
      }
      out.push_back({delta, core, pick_op(wf), addr_of(block)});
    }
    return out;
  }

  if (spec.name == "stream") {
    check_params(spec, {"n", "write_frac", "delta"});
    const uint64_t n = gen_u64(spec, "n", 100'000);
    const double wf = gen_double(spec, "write_frac", 0.0);
    const uint64_t delta = gen_u64(spec, "delta", 0);
    // Disjoint per-core regions; addresses strictly increase per core, no
    // block is ever touched twice.
    const uint64_t span = n + 1;
    std::vector<uint64_t> next(vaults, 0);
    out.reserve(n);
    for (uint64_t i = 0; i < n; ++i) {
      const uint32_t core = static_cast<uint32_t>(i % vaults);
      const uint64_t block = static_cast<uint64_t>(core) * span + next[core]++;
      out.push_back({delta, core, pick_op(wf), addr_of(block)});
    }
    return out;
  }

  if (spec.name == "single_consumer") {
    check_params(spec, {"blocks", "reuse", "consumer", "write_frac", "delta", "n",
                        "order"});
    const uint64_t blocks = gen_u64(spec, "blocks", 256);
    const uint64_t reuse = gen_u64(spec, "reuse", 64);
    const uint64_t consumer = gen_u64(spec, "consumer", 0);
    const double wf = gen_double(spec, "write_frac", 0.0);
    const uint64_t delta = gen_u64(spec, "delta", 0);
    const uint64_t n = gen_u64(spec, "n", blocks * reuse);
    std::string order = "pass";
    if (const auto it = spec.params.find("order"); it != spec.params.end())
      order = it->second;
    if (order != "pass" && order != "block")
      throw ConfigError("single_consumer: order must be pass or block");
    if (blocks == 0 || reuse == 0)
      throw ConfigError("single_consumer: blocks and reuse must be > 0");
    if (consumer >= vaults) throw ConfigError("single_consumer: consumer out of range");
    // Block i is homed away from the consumer and lands in table set i, so a
    // working set of `blocks` exercises exactly that many sets. Pass order
    // sweeps the whole set between reuses; block order burns each block's
    // reuse consecutively.
    const auto block_for = [&](uint64_t i) {
      if (vaults == 1) return i;
      const uint64_t home = (consumer + 1 + i % (vaults - 1)) % vaults;
      return i * vaults + home;
    };
    out.reserve(n);
    uint64_t emitted = 0;
    const uint64_t outer = order == "pass" ? reuse : blocks;
    const uint64_t inner = order == "pass" ? blocks : reuse;
    for (uint64_t a = 0; a < outer && emitted < n; ++a) {
      for (uint64_t b = 0; b < inner && emitted < n; ++b, ++emitted) {
        const uint64_t i = order == "pass" ? b : a;
        out.push_back({delta, static_cast<uint32_t>(consumer), pick_op(wf),
                       addr_of(block_for(i))});
      }
    }
    return out;
  }

  throw ConfigError("unknown trace generator '" + spec.name + "'");
}

}  // namespace dlpim
