#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "cmw/middleware.hpp"
#include "sim/time.hpp"

namespace unity::harness {

enum class Outcome { Pending, Established, Failed, Abandoned, Dropped };
const char* outcome_name(Outcome o) noexcept;

struct CallRecord {
  std::string call_id;
  std::string caller;  // subscriber ids, e.g. user0001
  std::string callee;
  sim::Micros t_sent{0};
  std::optional<sim::Micros> t_invite_rx;
  std::optional<sim::Micros> t_invite_tx;
  std::optional<sim::Micros> t_answered;
  std::optional<sim::Micros> t_ended;
  Outcome outcome = Outcome::Pending;
  int final_status = 0;
  bool in_window = false;
  std::set<PouchId> pouches;  // every per-call placement, including failed attempts

  std::optional<double> setup_latency_ms() const;
};

struct CpuSample {
  sim::Micros t{0};
  PouchId pouch = 0;
  double utilization = 0.0;
  int concurrent_calls = 0;
};

struct MediaSample {
  std::uint32_t call = 0;  // index into MetricsStore::calls
  std::uint32_t frame = 0;
  std::int32_t offset_us = 0;
};

struct MetricsStore {
  sim::Micros window_start{0};
  sim::Micros window_end{0};
  std::vector<CallRecord> calls;
  std::vector<CpuSample> cpu;
  std::vector<MediaSample> media;
  std::uint64_t registrations_sent = 0;
  std::uint64_t registrations_ok = 0;
  std::uint64_t registrations_failed = 0;
  cmw::Counters units;
  std::uint64_t live_per_call_units = 0;
  std::uint64_t dropped_deliveries = 0;
};

struct LatencyStats {
  std::size_t count = 0;
  double mean = 0, stddev = 0, p95 = 0, min = 0, max = 0;
};

struct LinearFit {
  double slope = 0, intercept = 0, r2 = 0;
};

struct CpuBucket {
  int calls = 0;
  double mean_cpu = 0;
  std::size_t samples = 0;
};

// Aggregates over the measurement window. Outcome counters cover every call
// whose INVITE was sent inside the window; `failed` includes `dropped`.
struct Summary {
  std::size_t attempted = 0, established = 0, failed = 0, abandoned = 0, dropped = 0, pending = 0;
  LatencyStats latency;
  double cpu_mean = 0;
  double concurrent_mean = 0;
  std::vector<CpuBucket> cpu_buckets;
  LinearFit cpu_fit;
  std::size_t jitter_samples = 0;
  double jitter_mean_ms = 0, jitter_stddev_ms = 0;
};

LatencyStats describe(std::vector<double> xs);
double mean_of(const std::vector<double>& xs);
double stddev_of(const std::vector<double>& xs);  // population
// Least squares. r2 is 1 when the residual is zero, 0 when y has no variance
// that x explains.
LinearFit linear_fit(const std::vector<double>& x, const std::vector<double>& y);
std::vector<double> ranks(const std::vector<double>& xs);  // average ranks, 1-based
double spearman(const std::vector<double>& a, const std::vector<double>& b);

// Throws Errc::empty_window when the store holds no sample at all.
Summary compute_metrics(const MetricsStore& store);

}  // namespace unity::harness
