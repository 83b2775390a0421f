#include "harness/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "common/error.hpp"

namespace unity::harness {

const char* outcome_name(Outcome o) noexcept {
  switch (o) {
    case Outcome::Pending: return "pending";
    case Outcome::Established: return "established";
    case Outcome::Failed: return "failed";
    case Outcome::Abandoned: return "abandoned";
    case Outcome::Dropped: return "dropped";
  }
  return "?";
}

std::optional<double> CallRecord::setup_latency_ms() const {
  if (!t_invite_rx || !t_invite_tx) return std::nullopt;
  return sim::to_ms(*t_invite_tx - *t_invite_rx);
}

double mean_of(const std::vector<double>& xs) {
  if (xs.empty()) return 0.0;
  return std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
}

double stddev_of(const std::vector<double>& xs) {
  if (xs.size() < 2) return 0.0;
  double m = mean_of(xs);
  double ss = 0;
  for (double x : xs) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(xs.size()));
}

LatencyStats describe(std::vector<double> xs) {
  LatencyStats s;
  s.count = xs.size();
  if (xs.empty()) return s;
  s.mean = mean_of(xs);
  s.stddev = stddev_of(xs);
  std::sort(xs.begin(), xs.end());
  s.min = xs.front();
  s.max = xs.back();
  // nearest rank
  auto rank = static_cast<std::size_t>(std::ceil(0.95 * static_cast<double>(xs.size())));
  s.p95 = xs[std::max<std::size_t>(rank, 1) - 1];
  return s;
}

LinearFit linear_fit(const std::vector<double>& x, const std::vector<double>& y) {
  LinearFit f;
  std::size_t n = std::min(x.size(), y.size());
  if (n < 2) return f;
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0) {
    f.intercept = my;
    return f;
  }
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  double ss_res = 0;
  for (std::size_t i = 0; i < n; ++i) {
    double e = y[i] - (f.intercept + f.slope * x[i]);
    ss_res += e * e;
  }
  if (syy == 0) {
    f.r2 = ss_res == 0 ? 1.0 : 0.0;
  } else {
    f.r2 = 1.0 - ss_res / syy;
  }
  // exact fits should read exactly 1
  if (ss_res <= 1e-24 * std::max(syy, 1.0)) f.r2 = 1.0;
  return f;
}

std::vector<double> ranks(const std::vector<double>& xs) {
  std::vector<std::size_t> idx(xs.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return xs[a] < xs[b]; });
  std::vector<double> r(xs.size());
  for (std::size_t i = 0; i < idx.size();) {
    std::size_t j = i;
    while (j + 1 < idx.size() && xs[idx[j + 1]] == xs[idx[i]]) ++j;
    double avg = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (std::size_t k = i; k <= j; ++k) r[idx[k]] = avg;
    i = j + 1;
  }
  return r;
}

double spearman(const std::vector<double>& a, const std::vector<double>& b) {
  auto ra = ranks(a);
  auto rb = ranks(b);
  // Pearson on ranks handles ties.
  double ma = mean_of(ra), mb = mean_of(rb);
  double num = 0, da = 0, db = 0;
  for (std::size_t i = 0; i < ra.size() && i < rb.size(); ++i) {
    num += (ra[i] - ma) * (rb[i] - mb);
    da += (ra[i] - ma) * (ra[i] - ma);
    db += (rb[i] - mb) * (rb[i] - mb);
  }
  if (da == 0 || db == 0) return 0.0;
  return num / std::sqrt(da * db);
}

Summary compute_metrics(const MetricsStore& store) {
  std::size_t in_window = 0;
  for (const auto& c : store.calls) in_window += c.in_window ? 1 : 0;
  if (in_window == 0 && store.cpu.empty() && store.media.empty()) {
    throw Error(Errc::empty_window, "no samples inside the measurement window");
  }

  Summary s;
  std::vector<double> lat;
  for (const auto& c : store.calls) {
    if (!c.in_window) continue;
    ++s.attempted;
    switch (c.outcome) {
      case Outcome::Established: ++s.established; break;
      case Outcome::Failed: ++s.failed; break;
      case Outcome::Abandoned: ++s.abandoned; break;
      case Outcome::Dropped:
        ++s.dropped;
        ++s.failed;
        break;
      case Outcome::Pending:
        ++s.pending;
        ++s.failed;
        break;
    }
    if (auto l = c.setup_latency_ms()) lat.push_back(*l);
  }
  s.latency = describe(std::move(lat));

  // Mean over pouches per sample instant, then bucket by concurrency.
  std::map<sim::Micros, std::pair<double, int>> per_t;  // sum, n
  std::map<sim::Micros, int> conc;
  for (const auto& c : store.cpu) {
    auto& e = per_t[c.t];
    e.first += c.utilization;
    ++e.second;
    conc[c.t] = c.concurrent_calls;
  }
  std::vector<double> xs, ys;
  std::map<int, std::pair<double, std::size_t>> buckets;
  for (const auto& [t, e] : per_t) {
    double m = e.first / e.second;
    int calls = conc[t];
    xs.push_back(calls);
    ys.push_back(m);
    auto& b = buckets[calls];
    b.first += m;
    ++b.second;
  }
  s.cpu_mean = mean_of(ys);
  s.concurrent_mean = mean_of(xs);
  for (const auto& [calls, b] : buckets) {
    s.cpu_buckets.push_back(CpuBucket{calls, b.first / static_cast<double>(b.second), b.second});
  }
  s.cpu_fit = linear_fit(xs, ys);

  // Welford: the media series can hold millions of samples.
  double mean = 0, m2 = 0;
  std::size_t n = 0;
  for (const auto& m : store.media) {
    double v = m.offset_us / 1000.0;
    ++n;
    double d = v - mean;
    mean += d / static_cast<double>(n);
    m2 += d * (v - mean);
  }
  s.jitter_samples = n;
  if (n > 0) {
    s.jitter_mean_ms = mean;
    s.jitter_stddev_ms = std::sqrt(m2 / static_cast<double>(n));
  }
  return s;
}

}  // namespace unity::harness
