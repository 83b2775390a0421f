#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "harness/metrics.hpp"
#include "harness/scenario.hpp"
#include "ims/app.hpp"
#include "orchestration/deployment.hpp"

namespace unity::harness {

class UaEmulator;

struct KillSpec {
  sim::Micros at{0};
  PouchId pouch = 0;
};

struct RunOptions {
  std::optional<KillSpec> kill;
  bool trace_hops = false;
  bool keep_media = true;      // false: jitter stats only, no per-frame rows
  bool collect_logs = true;
  // Virtual time simulated after the window closes so calls can finish.
  // Defaults to call duration + 40 s.
  std::optional<sim::Micros> drain;
  // Runs after the system is deployed and before traffic starts.
  std::function<void(orch::Deployment&, ims::ImsApp&, UaEmulator&)> setup;
};

struct RunResult {
  std::string name;
  orch::Descriptor descriptor;
  ScenarioConfig scenario;
  std::uint64_t seed = 0;
  MetricsStore store;
  std::optional<Summary> summary;  // absent when the window was empty
  std::string log_tsv;
  std::vector<orch::ScaleDecision> scale_history;
  std::map<std::string, std::vector<std::pair<std::string, std::string>>> hops;
  std::uint64_t events = 0;
  double wall_seconds = 0;
};

RunResult run_experiment(const std::string& name, const orch::Descriptor& descriptor, const ScenarioConfig& scenario,
                         std::uint64_t seed, const RunOptions& options = {});

struct NamedDescriptor {
  std::string name;
  orch::Descriptor descriptor;
};

struct RankingRow {
  std::string name;
  double latency_mean_ms = 0;
  int latency_rank = 0;  // 1 = best
  double jitter_stddev_ms = 0;
  int jitter_rank = 0;
};

struct MatrixReport {
  std::vector<RunResult> runs;  // input order
  std::vector<RankingRow> ranking;
};

// Same scenario and seed for every config; configs run on `threads` worker
// threads (0 = hardware concurrency).
MatrixReport run_experiment_matrix(const std::vector<NamedDescriptor>& configs, const ScenarioConfig& scenario,
                                   std::uint64_t seed, unsigned threads = 0, const RunOptions& options = {});

std::vector<RankingRow> rank(const std::vector<RunResult>& runs);

}  // namespace unity::harness
