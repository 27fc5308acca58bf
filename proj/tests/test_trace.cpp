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

#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <set>

#include "dlpim/stats.hpp"
#include "dlpim/trace.hpp"

using namespace dlpim;

namespace {
const Topology& hmc() {
  static const Topology t = Topology::preset("hmc6x6");
  return t;
}

std::vector<uint64_t> home_counts(const std::vector<TraceRecord>& recs,
                                  uint32_t block_bytes, uint32_t vaults) {
  std::vector<uint64_t> counts(vaults, 0);
  for (const TraceRecord& r : recs) ++counts[(r.addr / block_bytes) % vaults];
  return counts;
}
}  // namespace

TEST_CASE("generator spec parsing") {
  const GeneratorSpec s = GeneratorSpec::parse("hotspot:p=0.8,n=100000");
  CHECK(s.name == "hotspot");
  CHECK(s.params.at("p") == "0.8");
  CHECK(s.params.at("n") == "100000");
  CHECK(GeneratorSpec::parse("stream").params.empty());
  CHECK_THROWS_AS(GeneratorSpec::parse("stream:oops"), ConfigError);
  CHECK_THROWS_AS(generate_trace(GeneratorSpec::parse("nope:n=1"), hmc(), 64, 1),
                  ConfigError);
  CHECK_THROWS_AS(generate_trace(GeneratorSpec::parse("zipf:s=0"), hmc(), 64, 1),
                  ConfigError);
  CHECK_THROWS_AS(generate_trace(GeneratorSpec::parse("uniform:bogus=1"), hmc(), 64, 1),
                  ConfigError);
}

TEST_CASE("uniform spreads home vaults evenly at sample size 36k") {
  const auto recs = generate_trace(GeneratorSpec::parse("uniform:n=36000,blocks=8192"),
                                   hmc(), 64, 5);
  REQUIRE(recs.size() == 36000);
  CHECK(cov(home_counts(recs, 64, 32)) < 0.1);
}

TEST_CASE("hotspot concentrates the configured fraction at one vault") {
  const auto recs = generate_trace(
      GeneratorSpec::parse("hotspot:n=50000,p=0.8,hot_vault=3"), hmc(), 64, 9);
  const auto counts = home_counts(recs, 64, 32);
  const double hot_share = static_cast<double>(counts[3]) / 50000.0;
  CHECK(hot_share > 0.75);
  CHECK(hot_share < 0.87);
  // Analytically this distribution has CoV well above 2.
  CHECK(cov(counts) > 2.0);
}

TEST_CASE("stream never reuses a block and is per-core monotone") {
  const auto recs = generate_trace(GeneratorSpec::parse("stream:n=20000"), hmc(), 64, 2);
  std::set<BlockAddr> seen;
  std::vector<BlockAddr> last(32, 0);
  for (const TraceRecord& r : recs) {
    CHECK(seen.insert(r.addr).second);  // zero reuse
    if (last[r.core] != 0) CHECK(r.addr > last[r.core]);
    last[r.core] = r.addr;
  }
}

TEST_CASE("single_consumer touches the requested working set from one core") {
  const auto recs = generate_trace(
      GeneratorSpec::parse("single_consumer:blocks=100,reuse=4,consumer=2"), hmc(), 64, 3);
  REQUIRE(recs.size() == 400);
  std::set<BlockAddr> blocks;
  for (const TraceRecord& r : recs) {
    CHECK(r.core == 2);
    CHECK((r.addr / 64) % 32 != 2);  // all remote to the consumer
    blocks.insert(r.addr);
  }
  CHECK(blocks.size() == 100);
}

TEST_CASE("zipf skews toward a few blocks") {
  const auto recs = generate_trace(
      GeneratorSpec::parse("zipf:n=30000,blocks=4096,s=1.2"), hmc(), 64, 4);
  std::map<BlockAddr, uint64_t> counts;
  for (const TraceRecord& r : recs) ++counts[r.addr];
  uint64_t top = 0;
  for (const auto& [a, c] : counts) top = std::max(top, c);
  CHECK(top > 30000 / 100);          // head is hot
  CHECK(counts.size() > 500);        // tail exists
}

TEST_CASE("generators are reproducible from the seed") {
  const auto a = generate_trace(GeneratorSpec::parse("hotspot:n=5000"), hmc(), 64, 77);
  const auto b = generate_trace(GeneratorSpec::parse("hotspot:n=5000"), hmc(), 64, 77);
  const auto c = generate_trace(GeneratorSpec::parse("hotspot:n=5000"), hmc(), 64, 78);
  CHECK(a == b);
  CHECK(a != c);
}

TEST_CASE("trace files round-trip, plain and gzip") {
  const auto recs = generate_trace(GeneratorSpec::parse("uniform:n=500"), hmc(), 64, 6);
  for (const char* name : {"trace_roundtrip.txt", "trace_roundtrip.txt.gz"}) {
    const std::string path = std::string("/tmp/dlpim_") + name;
    write_trace(path, recs);
    CHECK(load_trace(path) == recs);
    std::remove(path.c_str());
  }
}

TEST_CASE("trace parser reports the offending line") {
  const std::string path = "/tmp/dlpim_bad_trace.txt";
  {
    std::ofstream f(path);
    f << "# a comment\n";
    f << "0 3 R 0x1000\n";
    f << "\n";
    f << "0 3 X 0x2000\n";
  }
  try {
    load_trace(path);
    FAIL("expected TraceError");
  } catch (const TraceError& e) {
    const std::string what = e.what();
    CHECK(what.find(":4") != std::string::npos);  // line number
    CHECK(what.find("op") != std::string::npos);
  }
  std::remove(path.c_str());

  const auto ok = [&] {
    std::ofstream f(path);
    f << "5 1 W 0x40  # trailing comment\n";
    f.close();
    return load_trace(path);
  }();
  REQUIRE(ok.size() == 1);
  CHECK(ok[0].delta == 5);
  CHECK(ok[0].core == 1);
  CHECK(ok[0].op == Op::Write);
  CHECK(ok[0].addr == 0x40);
  std::remove(path.c_str());
}
