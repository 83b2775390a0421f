#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "common/error.hpp"
#include "harness/experiment.hpp"
#include "harness/golden.hpp"
#include "harness/report.hpp"

using namespace unity;
using namespace unity::harness;
namespace fs = std::filesystem;

namespace {

Errc code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  return Errc::ok;
}

std::size_t line_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.line().value_or(0);
  }
  return 0;
}

ScenarioConfig small(double rate, double duration, double warmup, double window) {
  ScenarioConfig s;
  s.call_rate = rate;
  s.call_duration = duration;
  s.subscribers = 200;
  s.reregistration_rate = 20;
  s.warmup = warmup;
  s.window = window;
  return s;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

RunOptions quick() {
  RunOptions o;
  o.drain = sim::from_ms(60000);
  return o;
}

}  // namespace

TEST_CASE("summary statistics") {
  CHECK(stddev_of({4, 4, 4, 4}) == 0.0);
  CHECK(stddev_of({2, 4, 4, 4, 5, 5, 7, 9}) == doctest::Approx(2.0));
  CHECK(mean_of({}) == 0.0);

  auto d = describe({5, 1, 3, 2, 4, 6, 7, 8, 9, 10, 11, 12, 13, 14, 15, 16, 17, 18, 19, 20});
  CHECK(d.count == 20);
  CHECK(d.min == 1);
  CHECK(d.max == 20);
  CHECK(d.p95 == 19);
  CHECK(d.mean == doctest::Approx(10.5));

  auto f = linear_fit({1, 2, 3, 4}, {3, 5, 7, 9});
  CHECK(f.slope == doctest::Approx(2));
  CHECK(f.intercept == doctest::Approx(1));
  CHECK(f.r2 == 1.0);
  auto flat = linear_fit({1, 2, 3}, {2, 2, 2});
  CHECK(flat.slope == 0);
  CHECK(flat.r2 == 1.0);
  // y = x^2 on symmetric x: no linear part at all
  CHECK(linear_fit({-2, -1, 0, 1, 2}, {4, 1, 0, 1, 4}).r2 == doctest::Approx(0.0));

  CHECK(ranks({10, 20, 20, 5}) == std::vector<double>{2, 3.5, 3.5, 1});
  CHECK(spearman({1, 2, 3, 4}, {10, 20, 30, 40}) == doctest::Approx(1.0));
  CHECK(spearman({1, 2, 3, 4}, {4, 3, 2, 1}) == doctest::Approx(-1.0));
  // 1 - 6*sum(d^2)/(n(n^2-1)) with d = {0, -1, 1, 0, 0}
  CHECK(spearman({1, 2, 3, 4, 5}, {1, 3, 2, 4, 5}) == doctest::Approx(0.9));
}

TEST_CASE("empty store") {
  MetricsStore st;
  CHECK(code_of([&] { compute_metrics(st); }) == Errc::empty_window);
}

TEST_CASE("scenario files") {
  auto s = resolve_scenario("paper");
  CHECK(s.call_rate == 30);
  CHECK(s.call_duration == 200);
  CHECK(s.subscribers == 200);
  CHECK(s.reregistration_rate == 20);

  CHECK(parse_scenario("call_rate = 0\n").call_rate == 0);
  CHECK(code_of([] { parse_scenario("call_duration = -1\n"); }) == Errc::negative_rate);
  CHECK(code_of([] { parse_scenario("# c\ncall_rate 30\n"); }) == Errc::syntax_error);
  CHECK(line_of([] { parse_scenario("# c\n\ncall_rate 30\n"); }) == 3);
  CHECK(code_of([] { parse_scenario("subscribers = 1\n"); }) == Errc::syntax_error);
  CHECK(code_of([] { parse_scenario("subscribers = 2.5\n"); }) == Errc::syntax_error);
  CHECK(code_of([] { parse_scenario("colour = red\n"); }) == Errc::syntax_error);
  CHECK(code_of([] { parse_scenario("abandon_fraction = 1.5\n"); }) == Errc::syntax_error);
  CHECK(code_of([] { load_scenario("/nonexistent/x.scn"); }) == Errc::io_error);
  CHECK(code_of([] { resolve_scenario("nope"); }) == Errc::unknown_reference);

  auto round = parse_scenario(format_scenario(s));
  CHECK(round.call_rate == s.call_rate);
  CHECK(round.warmup == s.warmup);
  CHECK(round.window == s.window);
  CHECK(round.ring_delay == s.ring_delay);
}

TEST_CASE("zero call rate registers only") {
  auto r = run_experiment("DIST", resolve_descriptor("DIST"), small(0, 20, 10, 30), 1, quick());
  CHECK(r.store.calls.empty());
  CHECK(r.store.registrations_ok > 0);
  REQUIRE(r.summary);
  CHECK(r.summary->attempted == 0);
  CHECK(r.summary->concurrent_mean == 0);
}

TEST_CASE("a small DIST run") {
  const auto scen = small(60, 20, 30, 60);
  auto r = run_experiment("DIST", resolve_descriptor("DIST"), scen, 3, quick());
  REQUIRE(r.summary);
  const auto& s = *r.summary;

  SUBCASE("attempts follow the rate") { CHECK(s.attempted == 60); }
  SUBCASE("outcomes add up") {
    CHECK(s.established + s.failed + s.abandoned == s.attempted);
    CHECK(s.established == s.attempted);
  }
  SUBCASE("warmup calls are outside the window") {
    std::size_t out = 0;
    for (const auto& c : r.store.calls) {
      bool inside = c.t_sent >= r.store.window_start && c.t_sent < r.store.window_end;
      CHECK(c.in_window == inside);
      out += inside ? 0 : 1;
    }
    CHECK(out > 0);
  }
  SUBCASE("Little's law") {
    // arrivals per second times holding time
    CHECK(s.concurrent_mean == doctest::Approx(60.0 / 60.0 * 20.0).epsilon(0.1));
  }
  SUBCASE("per-call units are gone after drain") { CHECK(r.store.live_per_call_units == 0); }
}

TEST_CASE("same seed, same bytes") {
  const auto scen = small(60, 10, 10, 20);
  auto a = run_experiment("NO1", resolve_descriptor("NO1"), scen, 42, quick());
  auto b = run_experiment("NO1", resolve_descriptor("NO1"), scen, 42, quick());
  CHECK(calls_csv(a.store) == calls_csv(b.store));
  CHECK(cpu_csv(a.store) == cpu_csv(b.store));
  CHECK(media_csv(a.store) == media_csv(b.store));
  CHECK(a.log_tsv == b.log_tsv);
  auto c = run_experiment("NO1", resolve_descriptor("NO1"), scen, 43, quick());
  CHECK(calls_csv(a.store) != calls_csv(c.store));
}

TEST_CASE("latency does not improve with load") {
  // Steady state: profiles already cached on every pouch, Poisson arrivals so
  // the INVITE grid can't lock onto the re-registration grid.
  RunOptions o = quick();
  o.keep_media = false;
  o.collect_logs = false;
  o.setup = [](orch::Deployment&, ims::ImsApp& app, UaEmulator&) {
    for (PouchId p = 1; p <= 8; ++p) {
      for (const auto& impu : app.hss().impus()) app.profile_cache(p)[impu] = app.hss().lookup(impu);
    }
  };
  std::vector<double> lat, cpu;
  for (double rate : {10.0, 20.0, 30.0, 60.0}) {
    auto scen = resolve_scenario("paper");
    scen.call_rate = rate;
    scen.arrival = Arrival::Exponential;
    auto r = run_experiment("DIST", resolve_descriptor("DIST"), scen, 1, o);
    REQUIRE(r.summary);
    lat.push_back(r.summary->latency.mean);
    cpu.push_back(r.summary->cpu_mean);
  }
  for (std::size_t i = 1; i < lat.size(); ++i) {
    CHECK(lat[i] >= lat[i - 1]);
    CHECK(cpu[i] > cpu[i - 1]);
  }
}

TEST_CASE("report files") {
  const fs::path dir = fs::temp_directory_path() / "unity_test_report";
  fs::remove_all(dir);

  SUBCASE("empty window leaves header rows") {
    RunResult r;
    r.name = "x";
    emit_report(r, dir.string());
    CHECK(slurp(dir / "calls.csv") == "call_id,t_invite_rx_ms,t_invite_tx_ms,setup_latency_ms,orig,term,outcome\n");
    CHECK(slurp(dir / "cpu.csv") == "t_ms,pouch_id,utilization,concurrent_calls\n");
    CHECK(slurp(dir / "media.csv") == "call_id,frame_k,offset_ms\n");
    CHECK(fs::exists(dir / "summary.json"));
    CHECK(fs::exists(dir / "unity.log.tsv"));
  }
  SUBCASE("one call, one row") {
    RunResult r;
    r.name = "x";
    CallRecord c;
    c.call_id = "c1";
    c.caller = "user0001";
    c.callee = "user0002";
    c.t_invite_rx = sim::from_ms(1000);
    c.t_invite_tx = sim::from_ms(1032.8);
    c.outcome = Outcome::Established;
    c.in_window = true;
    r.store.calls.push_back(c);
    emit_report(r, dir.string());
    auto text = slurp(dir / "calls.csv");
    CHECK(text.substr(text.find('\n') + 1) == "c1,1000.000,1032.800,32.800,user0001,user0002,established\n");
    CHECK(text.find('\r') == std::string::npos);
  }
  fs::remove_all(dir);
}
