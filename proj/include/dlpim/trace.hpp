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
#include "dlpim/topology.hpp"
#include "dlpim/types.hpp"

namespace dlpim {

// One memory request from a PIM core. `delta` is the compute gap in cycles
// since the core's previous request issued.
struct TraceRecord {
  uint64_t delta = 0;
  uint32_t core = 0;
  Op op = Op::Read;
  BlockAddr addr = 0;

  bool operator==(const TraceRecord&) const = default;
};

// Text format, one request per line: "<delta> <core> R|W 0xADDR".
// '#' starts a comment; blank lines are skipped. Files ending in .gz are
// transparently (de)compressed.
std::vector<TraceRecord> load_trace(const std::string& path);
void write_trace(const std::string& path, const std::vector<TraceRecord>& records);

// Synthetic workload generators. All take the topology so block addresses can
// be laid out relative to vault homes; all are reproducible from the seed.
//
//   uniform:          n, blocks, write_frac, delta
//   zipf:             n, blocks, s (exponent > 0), write_frac, delta
//   hotspot:          n, p, hot_vault, hot_blocks, cold_blocks, burst,
//                     write_frac, delta
//   stream:           n, write_frac, delta         (monotone, zero reuse)
//   single_consumer:  blocks, reuse, consumer, write_frac, delta
//                     (one core sweeps `blocks` remote blocks `reuse` times)
std::vector<TraceRecord> generate_trace(const GeneratorSpec& spec,
                                        const Topology& topo,
                                        uint32_t block_bytes, uint64_t seed);

}  // namespace dlpim
