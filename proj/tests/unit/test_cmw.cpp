#include <doctest.h>

#include <memory>
#include <string>
#include <vector>

#include "cmw/middleware.hpp"
#include "common/error.hpp"
#include "harness/golden.hpp"
#include "ids/bus.hpp"
#include "orchestration/deployment.hpp"

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

struct Note : cmw::Payload {
  explicit Note(int v) : value(v) {}
  int value;
};

struct Trace {
  std::vector<std::pair<Micros, int>> seen;  // handler completion time, payload
};

// Records every handled payload; costs a fixed amount.
class Probe : public cmw::Unit {
 public:
  Probe(Trace& t, Micros cost) : trace_(t), cost_(cost) {}
  Micros cost_of(const cmw::Envelope&) override { return cost_; }
  void handle(const cmw::Envelope& env) override {
    auto* n = dynamic_cast<const Note*>(env.payload.get());
    trace_.seen.emplace_back(middleware().kernel().now(), n ? n->value : -1);
  }

 private:
  Trace& trace_;
  Micros cost_;
};

struct Rig {
  Kernel k{1};
  ids::Bus bus{k};
  cmw::FactoryRegistry f;
  cmw::Middleware mw{k, bus, f};
  Trace trace;
  std::vector<PouchId> p;

  explicit Rig(int pouches = 2, Micros cost = ms(1)) {
    for (auto t : kAllUnitTypes) {
      f.add(t, [this, cost](const cmw::InitParams&) { return std::make_unique<Probe>(trace, cost); });
    }
    mw.set_spawn_cost(Micros{0});
    for (int i = 0; i < pouches; ++i) {
      p.push_back(k.add_pouch("cu", 1.0));
      mw.attach_pouch(p.back(), ms(1000));
    }
  }
  void send(const UnitAddress& from, const UnitAddress& to, int v) {
    mw.send(from, to, std::make_shared<Note>(v));
  }
};

}  // namespace

TEST_CASE("spawn") {
  Rig r;
  int updates = 0;
  r.bus.add_tap(ids::topics::kResolvingUpdates, [&](const ids::Message&) { ++updates; });

  auto c = r.mw.spawn_unit(r.p[0], UnitType::C);
  CHECK(c.type == UnitType::C);
  CHECK(c.pouch == r.p[0]);
  CHECK(c.valid());
  CHECK(updates == 0);  // per-call units are addressed directly

  auto h = r.mw.spawn_unit(r.p[1], UnitType::H);
  CHECK(h.instance != c.instance);
  CHECK(updates == 1);

  SUBCASE("spawn charges its cost to the pouch") {
    r.mw.set_spawn_cost(ms(0.5));
    auto before = r.k.pouch(r.p[0]).busy_until;
    r.mw.spawn_unit(r.p[0], UnitType::T);
    CHECK(r.k.pouch(r.p[0]).busy_until == std::max(before, r.k.now()) + ms(0.5));
  }
  SUBCASE("on a killed pouch") {
    r.mw.kill_pouch(r.p[1]);
    CHECK(code_of([&] { r.mw.spawn_unit(r.p[1], UnitType::C); }) == Errc::pouch_dead);
  }
  SUBCASE("unregistered type") {
    Kernel k(1);
    ids::Bus bus(k);
    cmw::FactoryRegistry empty;
    cmw::Middleware mw(k, bus, empty);
    mw.attach_pouch(k.add_pouch("cu", 1.0), ms(1000));
    CHECK(code_of([&] { mw.spawn_unit(1, UnitType::A); }) == Errc::unknown_unit_type);
  }
}

TEST_CASE("pinned deployments reject off-pin spawns") {
  orch::Deployment d(harness::resolve_descriptor("NO3"), 1);
  Trace t;
  d.factories().add(UnitType::C, [&](const cmw::InitParams&) { return std::make_unique<Probe>(t, ms(1)); });
  CHECK(code_of([&] { d.middleware().spawn_unit(5, UnitType::C); }) == Errc::pinning_violation);
  CHECK(d.middleware().spawn_unit(3, UnitType::C).pouch == 3);
}

TEST_CASE("send delays and handler cost") {
  Rig r;
  auto a = r.mw.spawn_unit(r.p[0], UnitType::SIPh);
  auto local = r.mw.spawn_unit(r.p[0], UnitType::C);
  auto remote = r.mw.spawn_unit(r.p[1], UnitType::C);
  r.k.run_until(ms(10));
  r.send(a, local, 1);
  r.send(a, remote, 2);
  r.k.run_until(ms(20));
  REQUIRE(r.trace.seen.size() == 2);
  CHECK(r.trace.seen[0] == std::make_pair(ms(11), 1));    // no delay, 1 ms handler
  CHECK(r.trace.seen[1] == std::make_pair(ms(11.5), 2));  // 0.5 ms hop
  CHECK(r.k.pouch(r.p[0]).cumulative_busy == ms(1));
  CHECK(r.k.pouch(r.p[1]).cumulative_busy == ms(1));
}

TEST_CASE("one pouch handles one message at a time") {
  Rig r(1, ms(2));
  auto a = r.mw.spawn_unit(r.p[0], UnitType::C);
  auto b = r.mw.spawn_unit(r.p[0], UnitType::T);
  for (int i = 0; i < 3; ++i) r.send(a, b, i);
  r.k.run_until(ms(100));
  REQUIRE(r.trace.seen.size() == 3);
  CHECK(r.trace.seen[0].first == ms(2));
  CHECK(r.trace.seen[1].first == ms(4));
  CHECK(r.trace.seen[2].first == ms(6));
}

TEST_CASE("dead letters") {
  Rig r;
  auto a = r.mw.spawn_unit(r.p[0], UnitType::C);
  auto t = r.mw.spawn_unit(r.p[1], UnitType::T);

  SUBCASE("send to a terminated unit") {
    r.mw.terminate_unit(t);
    r.send(a, t, 1);
    r.k.run_until(ms(10));
    CHECK(r.mw.counters().dead_letters == 1);
    CHECK(r.mw.instance(r.p[1]).dead_letters() == 1);
    CHECK(r.trace.seen.empty());
  }
  SUBCASE("terminate with two queued messages") {
    r.send(a, t, 1);
    r.send(a, t, 2);
    r.send(a, t, 3);
    r.k.run_until(ms(1.6));  // first handled at 1.5, second in service, third behind it
    r.mw.terminate_unit(t);
    CHECK(r.mw.counters().dead_letters == 2);
    r.k.run_until(ms(10));
    CHECK(r.trace.seen.size() == 1);
  }
  SUBCASE("terminate after queueing") {
    r.send(a, t, 1);
    r.send(a, t, 2);
    r.k.run_until(ms(0.5));  // both delivered, first starts, second waits
    r.mw.terminate_unit(t);
    CHECK(r.mw.counters().dead_letters == 2);
  }
  SUBCASE("double terminate is harmless") {
    r.mw.terminate_unit(t);
    r.mw.terminate_unit(t);
    CHECK(r.mw.counters().terminated[static_cast<std::size_t>(UnitType::T)] == 1);
    CHECK(r.mw.instance(r.p[1]).unit_count(UnitType::T) == 0);
  }
}

TEST_CASE("resolve") {
  Rig r(3);
  CHECK(code_of([&] { r.mw.resolve(r.p[0], "HSS-frontend"); }) == Errc::service_unknown);

  auto a = r.mw.spawn_unit(r.p[1], UnitType::H);
  r.k.run_until(ms(1));
  CHECK(r.mw.resolve(r.p[0], "HSS-frontend") == a);
  CHECK(r.mw.resolve(r.p[0], "HSS-frontend") == a);

  auto b = r.mw.spawn_unit(r.p[2], UnitType::H);
  r.k.run_until(ms(2));
  SUBCASE("round robin") {
    auto x = r.mw.resolve(r.p[0], "HSS-frontend");
    auto y = r.mw.resolve(r.p[0], "HSS-frontend");
    auto z = r.mw.resolve(r.p[0], "HSS-frontend");
    CHECK(x != y);
    CHECK(x == z);
    CHECK(((x == a && y == b) || (x == b && y == a)));
  }
  SUBCASE("updates reach each pouch after its own delay") {
    auto c = r.mw.spawn_unit(r.p[0], UnitType::Diah);
    r.k.run_until(r.k.now());
    CHECK(r.mw.resolve(r.p[0], "Diameter") == c);  // same pouch, zero delay
    CHECK(code_of([&] { r.mw.resolve(r.p[1], "Diameter"); }) == Errc::service_unknown);
    r.k.run_until(r.k.now() + ms(0.5));
    CHECK(r.mw.resolve(r.p[1], "Diameter") == c);
  }
  SUBCASE("after the only instance is gone") {
    r.mw.terminate_unit(b);
    r.mw.kill_pouch(r.p[1]);
    r.bus.publish(ids::topics::kSystemStatus, Endpoint::system(),
                  ids::SystemStatus{ids::SystemStatus::Kind::PouchDown, r.p[1]});
    r.k.run_until(r.k.now() + ms(1));
    CHECK(code_of([&] { r.mw.resolve(r.p[0], "HSS-frontend"); }) == Errc::no_live_instance);
  }
}

TEST_CASE("pouch monitoring") {
  Rig r(2);
  std::vector<ids::UtilizationSample> got;
  r.bus.subscribe(ids::topics::kResourceUtilization, Endpoint::system(), [&](const ids::Message& m) {
    got.push_back(std::get<ids::UtilizationSample>(m));
  });
  r.k.execute_work(r.p[1], ms(400));
  r.k.run_until(ms(1000.5));  // samples taken at 1000, one hop to the observer
  REQUIRE(got.size() == 2);
  CHECK(got[0].pouch == r.p[0]);
  CHECK(got[0].at == ms(1000));
  CHECK(got[0].utilization == 0.0);
  CHECK(got[1].utilization == doctest::Approx(0.4));

  r.mw.kill_pouch(r.p[1]);
  got.clear();
  r.k.run_until(ms(5000.5));
  CHECK(got.size() == 4);
  for (const auto& s : got) CHECK(s.pouch == r.p[0]);
}

TEST_CASE("one CMW per pouch") {
  Rig r(1);
  CHECK(code_of([&] { r.mw.attach_pouch(r.p[0], ms(1000)); }) == Errc::duplicate_cmw);
}

TEST_CASE("sent = handled + dead letters + in flight") {
  Rig r(4, ms(3));
  std::vector<UnitAddress> units;
  for (int i = 0; i < 20; ++i) units.push_back(r.mw.spawn_unit(r.p[static_cast<std::size_t>(i % 4)], UnitType::C));
  auto& rnd = r.k.random();
  for (int step = 0; step < 400; ++step) {
    auto from = units[rnd.uniform_index("from", units.size())];
    auto to = units[rnd.uniform_index("to", units.size())];
    r.send(from, to, step);
    if (step % 37 == 0) r.mw.terminate_unit(units[rnd.uniform_index("kill", units.size())]);
    if (step == 250) r.mw.kill_pouch(r.p[3]);
    r.k.run_until(r.k.now() + Micros{static_cast<std::int64_t>(rnd.uniform_index("gap", 2000))});
    const auto& c = r.mw.counters();
    CHECK(c.sent >= c.handled + c.dead_letters);
  }
  r.k.run_until(r.k.now() + ms(60'000));
  const auto& c = r.mw.counters();
  CHECK(c.sent == 400);
  CHECK(c.in_flight() == 0);
  CHECK(c.handled + c.dead_letters == 400);
  CHECK(c.dead_letters > 0);
}

TEST_CASE("placement changes timing only") {
  // A relay chain: each unit forwards to the next until the hop count runs out.
  struct Hop : cmw::Payload {
    int left;
    int tag;
    Hop(int l, int t) : left(l), tag(t) {}
  };
  struct Relay : cmw::Unit {
    std::vector<UnitAddress>* ring;
    std::vector<std::string>* log;
    Micros cost_of(const cmw::Envelope&) override { return ms(1); }
    void handle(const cmw::Envelope& env) override {
      auto& h = dynamic_cast<const Hop&>(*env.payload);
      log->push_back(std::to_string(address().instance) + ":" + std::to_string(h.tag) + ":" + std::to_string(h.left));
      if (h.left == 0) return;
      auto next = (*ring)[(address().instance + static_cast<InstanceId>(h.tag)) % ring->size()];
      middleware().send(address(), next, std::make_shared<Hop>(h.left - 1, h.tag));
    }
  };
  auto trace = [](bool spread) {
    Kernel k(1, NetworkModel{Micros{0}, Micros{0}, Micros{0}});
    ids::Bus bus(k);
    cmw::FactoryRegistry f;
    cmw::Middleware mw(k, bus, f);
    std::vector<UnitAddress> ring;
    std::vector<std::string> log;
    f.add(UnitType::C, [&](const cmw::InitParams&) {
      auto u = std::make_unique<Relay>();
      u->ring = &ring;
      u->log = &log;
      return u;
    });
    for (int i = 0; i < 4; ++i) mw.attach_pouch(k.add_pouch("cu", 1.0), ms(1000));
    for (int i = 0; i < 6; ++i) ring.push_back(mw.spawn_unit(spread ? static_cast<PouchId>(1 + i % 4) : 1, UnitType::C));
    mw.send_external(Endpoint::ua(), ring[0], std::make_shared<Hop>(12, 1));
    k.run_until(ms(1000));
    return log;
  };
  auto together = trace(false);
  auto spread = trace(true);
  CHECK(together.size() == 13);
  CHECK(together == spread);
}
