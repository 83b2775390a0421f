#include "harness/report.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "common/error.hpp"

namespace unity::harness {

namespace {

using json = nlohmann::ordered_json;

void append_fixed(std::string& out, double v, int decimals) {
  char buf[64];
  int n = std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  out.append(buf, static_cast<std::size_t>(n));
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(Errc::io_error, "cannot write " + path.string());
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw Error(Errc::io_error, "short write to " + path.string());
}

void make_dir(const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec || !std::filesystem::is_directory(dir)) throw Error(Errc::io_error, "cannot create directory " + dir);
}

// Rounded for the JSON summary so reports stay stable and readable.
double r6(double v) { return std::round(v * 1e6) / 1e6; }

json latency_json(const LatencyStats& l) {
  return json{{"count", l.count},     {"mean_ms", r6(l.mean)}, {"stddev_ms", r6(l.stddev)},
              {"p95_ms", r6(l.p95)}, {"min_ms", r6(l.min)},   {"max_ms", r6(l.max)}};
}

}  // namespace

std::string calls_csv(const MetricsStore& store) {
  std::string out = "call_id,t_invite_rx_ms,t_invite_tx_ms,setup_latency_ms,orig,term,outcome\n";
  for (const auto& c : store.calls) {
    if (!c.in_window) continue;
    out += c.call_id;
    out += ',';
    if (c.t_invite_rx) append_fixed(out, sim::to_ms(*c.t_invite_rx), 3);
    out += ',';
    if (c.t_invite_tx) append_fixed(out, sim::to_ms(*c.t_invite_tx), 3);
    out += ',';
    if (auto l = c.setup_latency_ms()) append_fixed(out, *l, 3);
    out += ',';
    out += c.caller;
    out += ',';
    out += c.callee;
    out += ',';
    out += outcome_name(c.outcome);
    out += '\n';
  }
  return out;
}

std::string cpu_csv(const MetricsStore& store) {
  std::string out = "t_ms,pouch_id,utilization,concurrent_calls\n";
  for (const auto& s : store.cpu) {
    append_fixed(out, sim::to_ms(s.t), 3);
    out += ',' + std::to_string(s.pouch) + ',';
    append_fixed(out, s.utilization, 6);
    out += ',' + std::to_string(s.concurrent_calls) + '\n';
  }
  return out;
}

std::string media_csv(const MetricsStore& store) {
  std::string out = "call_id,frame_k,offset_ms\n";
  out.reserve(out.size() + store.media.size() * 28);
  for (const auto& m : store.media) {
    out += store.calls[m.call].call_id;
    out += ',';
    out += std::to_string(m.frame);
    out += ',';
    append_fixed(out, m.offset_us / 1000.0, 3);
    out += '\n';
  }
  return out;
}

std::string summary_json(const RunResult& run) {
  json j;
  j["config"] = run.name;
  j["seed"] = run.seed;
  const auto& d = run.descriptor;
  json desc;
  desc["mode"] = d.mode == orch::DeploymentMode::Pinned ? "pinned" : "distributed";
  desc["pin_map"] = orch::format_pin_map(d);
  json pools = json::array();
  for (const auto& p : d.pools) {
    pools.push_back(json{{"id", p.id}, {"pouches", p.initial}, {"max", p.max}, {"speed", p.speed}});
  }
  desc["pools"] = pools;
  j["descriptor"] = desc;

  const auto& s = run.scenario;
  j["scenario"] = json{{"call_rate", s.call_rate},
                       {"call_duration", s.call_duration},
                       {"subscribers", s.subscribers},
                       {"reregistration_rate", s.reregistration_rate},
                       {"warmup", s.warmup},
                       {"window", s.window},
                       {"arrival", s.arrival == Arrival::Deterministic ? "deterministic" : "exponential"},
                       {"ring_delay", s.ring_delay},
                       {"abandon_fraction", s.abandon_fraction}};

  Summary sum = run.summary.value_or(Summary{});
  j["calls"] = json{{"attempted", sum.attempted}, {"established", sum.established}, {"failed", sum.failed},
                    {"abandoned", sum.abandoned}, {"dropped", sum.dropped},         {"pending", sum.pending}};
  j["setup_latency"] = latency_json(sum.latency);
  json buckets = json::array();
  for (const auto& b : sum.cpu_buckets) {
    buckets.push_back(json{{"concurrent_calls", b.calls}, {"mean_cpu", r6(b.mean_cpu)}, {"samples", b.samples}});
  }
  j["cpu"] = json{{"mean", r6(sum.cpu_mean)},
                  {"concurrent_calls_mean", r6(sum.concurrent_mean)},
                  {"buckets", buckets},
                  {"fit", json{{"slope", r6(sum.cpu_fit.slope)}, {"intercept", r6(sum.cpu_fit.intercept)},
                               {"r2", r6(sum.cpu_fit.r2)}}}};
  j["jitter"] = json{{"samples", sum.jitter_samples},
                     {"mean_ms", r6(sum.jitter_mean_ms)},
                     {"stddev_ms", r6(sum.jitter_stddev_ms)}};

  const auto& st = run.store;
  j["registrations"] = json{{"sent", st.registrations_sent}, {"ok", st.registrations_ok}, {"failed", st.registrations_failed}};
  json units;
  for (auto t : kAllUnitTypes) {
    auto i = static_cast<std::size_t>(t);
    units[std::string(unit_type_name(t))] =
        json{{"spawned", st.units.spawned[i]}, {"terminated", st.units.terminated[i]}, {"lost", st.units.lost[i]}};
  }
  j["units"] = units;
  j["messages"] = json{{"sent", st.units.sent},
                       {"handled", st.units.handled},
                       {"dead_letters", st.units.dead_letters},
                       {"dropped_deliveries", st.dropped_deliveries}};
  j["live_per_call_units_at_end"] = st.live_per_call_units;
  json scale = json::array();
  for (const auto& e : run.scale_history) {
    if (e.action == orch::ScaleDecision::Action::None) continue;
    scale.push_back(json{{"t_ms", sim::to_ms(e.at)},
                         {"action", e.action == orch::ScaleDecision::Action::AddPouch ? "add" : "remove"},
                         {"pool", e.pool},
                         {"pouch", e.pouch},
                         {"mean_utilization", r6(e.mean_utilization)}});
  }
  j["scale_events"] = scale;
  return j.dump(2) + "\n";
}

std::string ranking_csv(const MatrixReport& report) {
  std::string out = "config,latency_mean_ms,latency_rank,jitter_stddev_ms,jitter_rank\n";
  for (const auto& r : report.ranking) {
    out += r.name + ',';
    append_fixed(out, r.latency_mean_ms, 3);
    out += ',' + std::to_string(r.latency_rank) + ',';
    append_fixed(out, r.jitter_stddev_ms, 4);
    out += ',' + std::to_string(r.jitter_rank) + '\n';
  }
  return out;
}

void emit_report(const RunResult& run, const std::string& dir) {
  make_dir(dir);
  std::filesystem::path p(dir);
  write_file(p / "calls.csv", calls_csv(run.store));
  write_file(p / "cpu.csv", cpu_csv(run.store));
  write_file(p / "media.csv", media_csv(run.store));
  write_file(p / "summary.json", summary_json(run));
  write_file(p / "unity.log.tsv", run.log_tsv);
}

void emit_matrix_report(const MatrixReport& report, const std::string& dir) {
  make_dir(dir);
  std::filesystem::path p(dir);
  for (const auto& run : report.runs) emit_report(run, (p / run.name).string());
  write_file(p / "ranking.csv", ranking_csv(report));
  json j = json::array();
  for (const auto& r : report.ranking) {
    j.push_back(json{{"config", r.name},
                     {"latency_mean_ms", r6(r.latency_mean_ms)},
                     {"latency_rank", r.latency_rank},
                     {"jitter_stddev_ms", r6(r.jitter_stddev_ms)},
                     {"jitter_rank", r.jitter_rank}});
  }
  write_file(p / "matrix.json", j.dump(2) + "\n");
}

}  // namespace unity::harness
