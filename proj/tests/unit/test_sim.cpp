#include <doctest.h>

#include <set>
#include <string>
#include <vector>

#include "common/error.hpp"
#include "sim/kernel.hpp"

using namespace unity;
using namespace unity::sim;

namespace {

Micros ms(double v) { return from_ms(v); }

Errc code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  return Errc::ok;
}

}  // namespace

TEST_CASE("same-time events fire in submission order") {
  Kernel k(1);
  std::string order;
  k.schedule(ms(5), [&] { order += "A"; });
  k.schedule(ms(5), [&] { order += "B"; });
  k.run_until(ms(10));
  CHECK(order == "AB");
}

TEST_CASE("event at now fires before later ones") {
  Kernel k(1);
  std::string order;
  k.run_until(ms(3));
  k.schedule(ms(4), [&] { order += "L"; });
  k.schedule(k.now(), [&] { order += "N"; });
  k.run_until(ms(10));
  CHECK(order == "NL");
}

TEST_CASE("scheduling in the past is rejected") {
  Kernel k(1);
  k.run_until(ms(5));
  CHECK(code_of([&] { k.schedule(ms(4), [] {}); }) == Errc::scheduling_in_past);
}

TEST_CASE("run_until") {
  Kernel k(1);
  SUBCASE("empty queue") {
    auto st = k.run_until(ms(100));
    CHECK(st.now == ms(100));
    CHECK(st.processed == 0);
    CHECK(k.now() == ms(100));
  }
  SUBCASE("stops at the horizon") {
    for (double t : {10.0, 20.0, 30.0}) k.schedule(ms(t), [] {});
    CHECK(k.run_until(ms(25)).processed == 2);
    CHECK(k.pending() == 1);
  }
  SUBCASE("events scheduled by handlers run in the same call") {
    int fired = 0;
    k.schedule(ms(10), [&] {
      ++fired;
      k.schedule(k.now(), [&] { ++fired; });
    });
    CHECK(k.run_until(ms(10)).processed == 2);
    CHECK(fired == 2);
  }
}

TEST_CASE("cancel") {
  Kernel k(1);
  bool fired = false;
  auto id = k.schedule(ms(1), [&] { fired = true; });
  CHECK(k.cancel(id));
  CHECK_FALSE(k.cancel(id));
  k.run_until(ms(2));
  CHECK_FALSE(fired);
}

TEST_CASE("execute_work completion times") {
  Kernel k(1);
  auto p = k.add_pouch("cu", 1.0);
  k.run_until(ms(10));
  SUBCASE("idle pouch") { CHECK(k.execute_work(p, ms(2)) == ms(12)); }
  SUBCASE("busy pouch queues behind") {
    k.execute_work(p, ms(5));  // busy until 15
    CHECK(k.execute_work(p, ms(2)) == ms(17));
  }
  SUBCASE("faster pouch") {
    auto fast = k.add_pouch("cu", 2.0);
    CHECK(k.execute_work(fast, ms(2)) == k.now() + ms(1));
  }
  SUBCASE("dead pouch") {
    k.kill_pouch(p);
    CHECK(code_of([&] { k.execute_work(p, ms(1)); }) == Errc::pouch_dead);
  }
}

TEST_CASE("completions on one pouch follow submission order") {
  Kernel k(3);
  auto p = k.add_pouch("cu", 1.0);
  std::vector<int> done;
  for (int i = 0; i < 50; ++i) {
    auto cost = Micros{static_cast<std::int64_t>(k.random().uniform_index("w", 3000))};
    k.execute_work(p, cost, [&, i] { done.push_back(i); });
  }
  k.run_until(ms(1000));
  REQUIRE(done.size() == 50);
  for (int i = 0; i < 50; ++i) CHECK(done[static_cast<std::size_t>(i)] == i);
}

TEST_CASE("transmit delays") {
  Kernel k(1);
  auto p1 = k.add_pouch("cu", 1.0);
  auto p2 = k.add_pouch("cu", 1.0);
  std::vector<Micros> at;
  auto rec = [&] { at.push_back(k.now()); };
  k.transmit(Endpoint::at(p1), Endpoint::at(p1), rec);
  k.transmit(Endpoint::at(p1), Endpoint::at(p2), rec);
  k.transmit(Endpoint::ua(), Endpoint::at(p1), rec);
  k.run_until(ms(5));
  CHECK(at == std::vector<Micros>{ms(0), ms(0.5), ms(1.0)});

  CHECK(code_of([&] { k.transmit(Endpoint::at(p1), Endpoint::at(99), [] {}); }) == Errc::unknown_endpoint);

  SUBCASE("delivery to a dead pouch is dropped and counted") {
    bool got = false;
    k.transmit(Endpoint::at(p1), Endpoint::at(p2), [&] { got = true; });
    k.kill_pouch(p2);
    k.run_until(ms(10));
    CHECK_FALSE(got);
    CHECK(k.dropped_deliveries() == 1);
  }
}

TEST_CASE("cpu_utilization") {
  Kernel k(1);
  auto p = k.add_pouch("cu", 1.0);
  SUBCASE("quarter busy") {
    k.execute_work(p, ms(250));
    k.run_until(ms(1000));
    CHECK(k.cpu_utilization(p, ms(1000)) == doctest::Approx(0.25));
  }
  SUBCASE("idle") {
    k.run_until(ms(1000));
    CHECK(k.cpu_utilization(p, ms(1000)) == 0.0);
  }
  SUBCASE("saturated never exceeds one") {
    k.execute_work(p, ms(5000));
    k.run_until(ms(1000));
    CHECK(k.cpu_utilization(p, ms(1000)) == 1.0);
  }
  SUBCASE("partial overlap with the window") {
    k.run_until(ms(100));
    k.execute_work(p, ms(300));  // busy 100..400
    k.run_until(ms(1100));
    CHECK(k.cpu_utilization(p, ms(1000)) == doctest::Approx(0.3));
    CHECK(k.cpu_utilization(p, ms(800)) == doctest::Approx(0.1 / 0.8));
  }
  SUBCASE("window longer than elapsed time") {
    k.run_until(ms(10));
    CHECK(code_of([&] { k.cpu_utilization(p, ms(20)); }) == Errc::window_too_large);
  }
}

TEST_CASE("busy time is conserved") {
  Kernel k(9);
  auto a = k.add_pouch("cu", 1.0);
  auto b = k.add_pouch("cu", 0.5);
  Micros expected{0};
  for (int i = 0; i < 200; ++i) {
    auto cost = Micros{static_cast<std::int64_t>(k.random().uniform_index("c", 5000))};
    auto p = i % 2 ? a : b;
    k.execute_work(p, cost);
    expected += p == a ? cost : cost * 2;
  }
  k.run_until(ms(10'000));
  CHECK(k.pouch(a).cumulative_busy + k.pouch(b).cumulative_busy == expected);
}

TEST_CASE("random sub-streams are independent of interleaving") {
  RandomStream r1(42), r2(42);
  std::vector<std::uint64_t> x1, x2;
  for (int i = 0; i < 100; ++i) {
    x1.push_back(r1.uniform_index("x", 1000));
    r1.uniform01("noise");
  }
  for (int i = 0; i < 100; ++i) x2.push_back(r2.uniform_index("x", 1000));
  CHECK(x1 == x2);
  RandomStream r3(43);
  CHECK(r3.uniform_index("x", 1u << 30) != RandomStream(42).uniform_index("x", 1u << 30));
}

TEST_CASE("uniform draws stay in range") {
  RandomStream r(7);
  std::set<std::uint64_t> seen;
  for (int i = 0; i < 10'000; ++i) {
    auto v = r.uniform_index("d", 6);
    CHECK(v < 6);
    seen.insert(v);
    auto u = r.uniform01("u");
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
  }
  CHECK(seen.size() == 6);
}
