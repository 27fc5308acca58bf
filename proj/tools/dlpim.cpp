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

// Command-line front end: run / compare / sweep / gen-trace.
// Exit codes: 0 success, 2 usage or configuration error, 3 runtime error.

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "dlpim/engine.hpp"

namespace {

using namespace dlpim;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitRuntime = 3;

struct CommonOpts {
  std::string config_path;
  std::string preset;
  std::string trace_path;
  std::string gen_spec;
  std::string policy;
  std::optional<uint64_t> seed;
  std::optional<uint64_t> warmup;
  std::vector<std::string> overrides;  // key=value
};

void add_common(CLI::App* cmd, CommonOpts& o) {
  cmd->add_option("--config", o.config_path, "config file (key = value, [section] headers)");
  cmd->add_option("--preset", o.preset, "topology preset: hmc6x6 or hbm4x2");
  cmd->add_option("--trace", o.trace_path, "trace file (.gz accepted)");
  cmd->add_option("--gen", o.gen_spec,
                  "trace generator spec, e.g. hotspot:p=0.8,n=100000");
  cmd->add_option("--policy", o.policy,
                  "always-on | always-off | hops-adaptive | latency-adaptive");
  cmd->add_option("--seed", o.seed, "RNG seed (falls back to $DLPIM_SEED)");
  cmd->add_option("--warmup", o.warmup, "requests to warm up before measuring");
  cmd->add_option("--set", o.overrides, "extra config override key=value")
      ->expected(-1);
}

SimConfig build_config(const CommonOpts& o) {
  SimConfig cfg;
  if (!o.config_path.empty()) cfg = load_config_file(o.config_path, cfg);
  if (!o.preset.empty()) cfg.preset = o.preset;
  if (!o.trace_path.empty()) cfg.trace_file = o.trace_path;
  if (!o.gen_spec.empty()) cfg.trace_gen = o.gen_spec;
  if (!o.policy.empty()) cfg.policy = parse_policy(o.policy);
  if (o.warmup) cfg.warmup_requests = *o.warmup;
  if (o.seed) {
    cfg.seed = *o.seed;
  } else if (const char* env = std::getenv("DLPIM_SEED")) {
    cfg.seed = std::stoull(env);
  }
  for (const std::string& kv : o.overrides) {
    const size_t eq = kv.find('=');
    if (eq == std::string::npos)
      throw ConfigError("--set expects key=value, got '" + kv + "'");
    cfg.apply(kv.substr(0, eq), kv.substr(eq + 1));
  }
  cfg.validate();
  return cfg;
}

std::vector<TraceRecord> load_trace_source(const SimConfig& cfg) {
  const bool has_file = !cfg.trace_file.empty();
  const bool has_gen = !cfg.trace_gen.empty();
  if (has_file == has_gen)
    throw ConfigError("provide exactly one trace source: --trace or --gen");
  if (has_file) return load_trace(cfg.trace_file);
  return generate_trace(GeneratorSpec::parse(cfg.trace_gen), build_topology(cfg),
                        cfg.block_bytes, cfg.seed);
}

std::string format_for(const std::string& path, const std::string& explicit_fmt) {
  if (!explicit_fmt.empty()) return explicit_fmt;
  if (path.size() > 4 && path.compare(path.size() - 4, 4, ".csv") == 0) return "csv";
  return "json";
}

StatsReport run_once(SimConfig cfg) {
  std::vector<TraceRecord> trace = load_trace_source(cfg);
  Simulator sim(cfg, std::move(trace));
  return sim.run();
}

int cmd_run(const CommonOpts& o, const std::string& out, const std::string& fmt) {
  const SimConfig cfg = build_config(o);
  const StatsReport report = run_once(cfg);
  if (out.empty()) {
    std::cout << to_json(report);
  } else {
    write_report(out, report, format_for(out, fmt));
  }
  return kExitOk;
}

int cmd_compare(const CommonOpts& o, const std::string& baseline_policy,
                const std::string& candidate_policy, const std::string& out) {
  SimConfig base_cfg = build_config(o);
  SimConfig cand_cfg = base_cfg;
  base_cfg.policy = parse_policy(baseline_policy);
  cand_cfg.policy = parse_policy(candidate_policy);

  // Same trace and seed on both sides by construction.
  StatsReport base, cand;
#pragma omp parallel sections
  {
#pragma omp section
    base = run_once(base_cfg);
#pragma omp section
    cand = run_once(cand_cfg);
  }

  const double sp = speedup(base, cand);
  nlohmann::ordered_json j;
  j["speedup"] = sp;
  j["latency_improvement_pct"] =
      base.avg_latency() > 0.0
          ? (base.avg_latency() - cand.avg_latency()) / base.avg_latency() * 100.0
          : 0.0;
  j["cov_delta"] = cand.cov_serves - base.cov_serves;
  j["traffic_delta_pct"] =
      base.bytes_per_cycle > 0.0
          ? (cand.bytes_per_cycle - base.bytes_per_cycle) / base.bytes_per_cycle * 100.0
          : 0.0;
  j["baseline"] = nlohmann::ordered_json::parse(to_json(base));
  j["candidate"] = nlohmann::ordered_json::parse(to_json(cand));
  const std::string text = j.dump(2) + "\n";
  if (out.empty()) {
    std::cout << text;
  } else {
    std::ofstream f(out);
    if (!f) throw SimError("cannot open '" + out + "'");
    f << text;
  }
  return kExitOk;
}

int cmd_sweep(const CommonOpts& o, const std::string& param,
              const std::string& values_csv, const std::string& out) {
  static const std::vector<std::string> kParams = {"table_sets", "epoch_cycles",
                                                   "threshold", "block_bytes"};
  if (std::find(kParams.begin(), kParams.end(), param) == kParams.end())
    throw ConfigError("sweep parameter must be one of table_sets, epoch_cycles, "
                      "threshold, block_bytes");
  std::vector<std::string> values;
  {
    std::stringstream ss(values_csv);
    std::string item;
    while (std::getline(ss, item, ',')) {
      if (!item.empty()) values.push_back(item);
    }
  }
  if (values.empty()) throw ConfigError("--values must list at least one value");
  std::sort(values.begin(), values.end(), [](const std::string& a, const std::string& b) {
    return std::stod(a) < std::stod(b);
  });

  const SimConfig base = build_config(o);
  struct Row {
    std::string value;
    StatsReport candidate;
    StatsReport baseline;
  };
  std::vector<Row> rows(values.size());
  // Runs are isolated deterministic instances; sweep them in parallel and
  // emit in value order regardless of completion order.
#pragma omp parallel for schedule(dynamic)
  for (size_t i = 0; i < values.size(); ++i) {
    SimConfig cand = base;
    cand.apply(param, values[i]);
    SimConfig off = cand;
    off.policy = PolicyKind::AlwaysOff;
    rows[i] = {values[i], run_once(cand), run_once(off)};
  }

  std::ostringstream csv;
  csv << param
      << ",cycles,avg_latency,speedup_vs_always_off,cov_serves,bytes_per_cycle,"
         "subscriptions_completed,nacked\n";
  for (const Row& r : rows) {
    csv << r.value << ',' << r.candidate.total_cycles << ','
        << r.candidate.avg_latency() << ','
        << speedup(r.baseline, r.candidate) << ',' << r.candidate.cov_serves
        << ',' << r.candidate.bytes_per_cycle << ','
        << r.candidate.subscriptions_completed << ','
        << r.candidate.subscriptions_nacked << '\n';
  }
  if (out.empty()) {
    std::cout << csv.str();
  } else {
    std::ofstream f(out);
    if (!f) throw SimError("cannot open '" + out + "'");
    f << csv.str();
  }
  return kExitOk;
}

int cmd_gen_trace(const CommonOpts& o, const std::string& out) {
  SimConfig cfg = build_config(o);
  if (cfg.trace_gen.empty()) throw ConfigError("gen-trace requires --gen");
  if (out.empty()) throw ConfigError("gen-trace requires -o <file>");
  const auto records = generate_trace(GeneratorSpec::parse(cfg.trace_gen),
                                      build_topology(cfg), cfg.block_bytes, cfg.seed);
  write_trace(out, records);
  std::cout << "wrote " << records.size() << " records to " << out << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"dlpim - trace-driven simulator of a PIM vault network with a "
               "data-subscription protocol"};
  app.require_subcommand(1);

  CommonOpts run_o, cmp_o, sweep_o, gen_o;
  std::string run_out, run_fmt, cmp_out, sweep_out, gen_out;
  std::string cmp_base = "always-off", cmp_cand = "always-on";
  std::string sweep_param, sweep_values;

  CLI::App* run = app.add_subcommand("run", "simulate one configuration");
  add_common(run, run_o);
  run->add_option("-o,--output", run_out, "report file (stdout if omitted)");
  run->add_option("--format", run_fmt, "json or csv (default from extension)");

  CLI::App* cmp = app.add_subcommand("compare", "run two policies on one trace");
  add_common(cmp, cmp_o);
  cmp->add_option("--baseline-policy", cmp_base, "policy for the baseline run");
  cmp->add_option("--candidate-policy", cmp_cand, "policy for the candidate run");
  cmp->add_option("-o,--output", cmp_out, "comparison file (stdout if omitted)");

  CLI::App* sweep = app.add_subcommand("sweep", "run one parameter over several values");
  add_common(sweep, sweep_o);
  sweep->add_option("--param", sweep_param, "table_sets | epoch_cycles | threshold | block_bytes")
      ->required();
  sweep->add_option("--values", sweep_values, "comma-separated values")->required();
  sweep->add_option("-o,--output", sweep_out, "CSV file (stdout if omitted)");

  CLI::App* gen = app.add_subcommand("gen-trace", "write a generator's output to a trace file");
  add_common(gen, gen_o);
  gen->add_option("-o,--output", gen_out, "trace file to write (.gz accepted)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (run->parsed()) return cmd_run(run_o, run_out, run_fmt);
    if (cmp->parsed()) return cmd_compare(cmp_o, cmp_base, cmp_cand, cmp_out);
    if (sweep->parsed()) return cmd_sweep(sweep_o, sweep_param, sweep_values, sweep_out);
    if (gen->parsed()) return cmd_gen_trace(gen_o, gen_out);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitUsage;
}
