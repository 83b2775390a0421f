#include "harness/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <sstream>
#include <thread>

#include "common/error.hpp"
#include "harness/traffic.hpp"

namespace unity::harness {

RunResult run_experiment(const std::string& name, const orch::Descriptor& descriptor, const ScenarioConfig& scenario,
                         std::uint64_t seed, const RunOptions& options) {
  auto wall0 = std::chrono::steady_clock::now();
  RunResult r;
  r.name = name;
  r.descriptor = descriptor;
  r.scenario = scenario;
  r.seed = seed;

  orch::Deployment dep(descriptor, seed);
  ims::ImsApp app(dep, ims::generate_subscribers(scenario.subscribers));
  UaEmulator ua(app, scenario, r.store);
  ua.set_trace(options.trace_hops);
  dep.start();
  if (options.setup) options.setup(dep, app, ua);
  ua.start();

  auto& kernel = dep.kernel();
  if (options.kill) {
    auto k = *options.kill;
    if (!kernel.has_pouch(k.pouch)) throw Error(Errc::unknown_pouch, "kill: no pouch " + std::to_string(k.pouch));
    kernel.schedule(k.at, [&dep, k] { dep.kill_pouch(k.pouch); });
  }

  auto drain = options.drain.value_or(sim::from_ms((scenario.call_duration + 40.0) * 1000.0));
  kernel.run_until(r.store.window_end + drain);

  r.store.units = dep.middleware().counters();
  r.store.live_per_call_units = dep.middleware().live_per_call_units();
  r.store.dropped_deliveries = kernel.dropped_deliveries();
  r.events = kernel.events_processed();
  r.scale_history = dep.scale_history();
  r.hops = ua.hops();

  try {
    r.summary = compute_metrics(r.store);
  } catch (const Error& e) {
    if (e.code() != Errc::empty_window) throw;
  }
  if (!options.keep_media) {
    r.store.media.clear();
    r.store.media.shrink_to_fit();
  }
  if (options.collect_logs) {
    std::ostringstream log;
    dep.logs().write_tsv(log);
    r.log_tsv = log.str();
  }
  r.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - wall0).count();
  return r;
}

std::vector<RankingRow> rank(const std::vector<RunResult>& runs) {
  std::vector<RankingRow> rows;
  for (const auto& r : runs) {
    RankingRow row;
    row.name = r.name;
    if (r.summary) {
      row.latency_mean_ms = r.summary->latency.mean;
      row.jitter_stddev_ms = r.summary->jitter_stddev_ms;
    }
    rows.push_back(row);
  }
  auto assign = [&rows](auto key, auto set) {
    std::vector<std::size_t> idx(rows.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return key(rows[a]) < key(rows[b]); });
    for (std::size_t pos = 0; pos < idx.size(); ++pos) set(rows[idx[pos]], static_cast<int>(pos + 1));
  };
  assign([](const RankingRow& r) { return r.latency_mean_ms; }, [](RankingRow& r, int k) { r.latency_rank = k; });
  assign([](const RankingRow& r) { return r.jitter_stddev_ms; }, [](RankingRow& r, int k) { r.jitter_rank = k; });
  return rows;
}

MatrixReport run_experiment_matrix(const std::vector<NamedDescriptor>& configs, const ScenarioConfig& scenario,
                                   std::uint64_t seed, unsigned threads, const RunOptions& options) {
  MatrixReport report;
  report.runs.resize(configs.size());
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(configs.size(), 1)));

  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(configs.size());
  auto worker = [&] {
    for (std::size_t i = next++; i < configs.size(); i = next++) {
      try {
        report.runs[i] = run_experiment(configs[i].name, configs[i].descriptor, scenario, seed, options);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  report.ranking = rank(report.runs);
  return report;
}

}  // namespace unity::harness
