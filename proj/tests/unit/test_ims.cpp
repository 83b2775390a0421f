#include <doctest.h>

#include <algorithm>
#include <map>
#include <string>
#include <vector>

#include "common/error.hpp"
#include "common/hash.hpp"
#include "harness/golden.hpp"
#include "harness/traffic.hpp"
#include "ims/units.hpp"
#include "sip/message.hpp"
#include "sip/sdp.hpp"

using namespace unity;
using namespace unity::sim;
using harness::Outcome;

namespace {

Micros ms(double v) { return from_ms(v); }

// Passes traffic through to the emulated UAs and keeps a copy.
struct Recorder : ims::UaGateway {
  explicit Recorder(harness::UaEmulator& ua) : inner(ua) {}
  void deliver(const std::string& ua, const std::string& raw) override {
    seen.emplace_back(ua, raw);
    inner.deliver(ua, raw);
  }
  std::vector<sip::SipMessage> to(const std::string& ua) const {
    std::vector<sip::SipMessage> out;
    for (const auto& [who, raw] : seen) {
      if (who == ua) out.push_back(sip::parse_message(raw));
    }
    return out;
  }
  harness::UaEmulator& inner;
  std::vector<std::pair<std::string, std::string>> seen;
};

harness::ScenarioConfig quiet(double ring_delay = 0) {
  harness::ScenarioConfig s;
  s.call_rate = 0;
  s.reregistration_rate = 0;
  s.warmup = 0;
  s.window = 100'000;
  s.ring_delay = ring_delay;
  return s;
}

// A deployed system with users 1..`registered` registered and nothing else
// going on.
struct Bed {
  orch::Deployment dep;
  ims::ImsApp app;
  harness::MetricsStore store;
  harness::UaEmulator ua;
  Recorder rec{ua};

  explicit Bed(orch::Descriptor d, harness::ScenarioConfig s = quiet(), int registered = 199,
               ims::HssDatabase hss = ims::generate_subscribers(200))
      : dep(std::move(d), 1), app(dep, std::move(hss)), ua(app, s, store) {
    app.set_gateway(&rec);
    ua.set_trace(true);
    dep.start();
    for (int i = 1; i <= registered; ++i) ua.register_ua(ims::user_name(i));
    settle(ms(5000));
  }
  explicit Bed(const std::string& name) : Bed(harness::resolve_descriptor(name)) {}

  void settle(Micros span) { dep.kernel().run_until(dep.kernel().now() + span); }
  std::size_t call(int a, int b, double hold_s = 2, const std::string& codecs = "PCMU,PCMA,telephone-event") {
    return ua.place_call(ims::user_name(a), ims::user_name(b), ms(hold_s * 1000), false, codecs);
  }
  const harness::CallRecord& rec_of(std::size_t i) const { return store.calls[i]; }
  std::size_t per_call_spawned() {
    const auto& c = dep.middleware().counters();
    std::size_t n = 0;
    for (auto t : {UnitType::C, UnitType::A, UnitType::T, UnitType::M}) n += c.spawned[static_cast<std::size_t>(t)];
    return n;
  }
  std::size_t per_call_terminated() {
    const auto& c = dep.middleware().counters();
    std::size_t n = 0;
    for (auto t : {UnitType::C, UnitType::A, UnitType::T, UnitType::M}) n += c.terminated[static_cast<std::size_t>(t)];
    return n;
  }
  ims::MediaProcessor* media(std::size_t call) {
    auto m = ua.media_of(call);
    return dynamic_cast<ims::MediaProcessor*>(dep.middleware().find(m.instance));
  }
};

PouchId home_of(int user, int pouches) {
  return static_cast<PouchId>(fnv1a64(ims::user_name(user)) % static_cast<std::uint64_t>(pouches) + 1);
}

// First two users whose home pouches are distinct and clear of the base
// units on pouches 1..4 in the distributed layout.
std::pair<int, int> quiet_pair() {
  int a = 0;
  for (int i = 1; i <= 199; ++i) {
    if (home_of(i, 8) <= 4) continue;
    if (!a) {
      a = i;
    } else if (home_of(i, 8) != home_of(a, 8)) {
      return {a, i};
    }
  }
  return {0, 0};
}

}  // namespace

TEST_CASE("single uncontended call latency matches the hand-summed chain") {
  const orch::CostModel c;
  const Micros d = ms(0.5);  // inter-pouch hop
  auto overlap = std::max(c.spawn, d);  // spawn on the target runs while the message is in flight
  auto profile_miss = d + c.h_query + d + c.diah_hss + d + c.h_cache_hit + d;
  auto profile_hit = d + c.h_cache_hit + d;
  // SIPh route, C-orig: INVITE, profile, T, A (which spawns M), C-term spawn
  auto orig = [&](Micros profile) {
    return c.sip_route + overlap + c.c_step + profile + c.c_step + c.spawn + c.t_event + c.c_step + c.spawn +
           c.a_negotiate + c.spawn + c.c_step;
  };
  // C-term: INVITE, profile, T, A joins M, INVITE out through SIPh
  auto term = [&](Micros profile) {
    return overlap + c.c_step + profile + c.c_step + c.spawn + c.t_event + c.c_step + c.spawn + c.a_negotiate +
           c.c_step + d + c.sip_route;
  };
  const Micros first = orig(profile_miss) + term(profile_miss);
  const Micros cached = orig(profile_hit) + term(profile_hit);
  // Frozen from summing the default costs by hand.
  REQUIRE(first == ms(32.8));
  REQUIRE(cached == ms(25.8));

  auto [a, b] = quiet_pair();
  REQUIRE(a != 0);
  Bed bed("DIST");
  REQUIRE(bed.dep.base_units().at(UnitType::SIPh).pouch == 1);
  REQUIRE(bed.dep.base_units().at(UnitType::H).pouch == 3);
  REQUIRE(bed.dep.base_units().at(UnitType::Diah).pouch == 4);

  auto i1 = bed.call(a, b);
  bed.settle(ms(10'000));
  REQUIRE(bed.rec_of(i1).setup_latency_ms().has_value());
  CHECK(ms(*bed.rec_of(i1).setup_latency_ms()) == first);
  CHECK(bed.rec_of(i1).outcome == Outcome::Established);
  CHECK(bed.rec_of(i1).t_invite_rx == bed.rec_of(i1).t_sent + ms(1));

  SUBCASE("both profiles now sit in the HSS front end's cache") {
    auto i2 = bed.call(a, b);
    bed.settle(ms(10'000));
    CHECK(ms(*bed.rec_of(i2).setup_latency_ms()) == cached);
    CHECK(bed.app.profile_cache(3).count(ims::impu_for(ims::user_name(a))) == 1);
    CHECK(bed.app.profile_cache(4).empty());
  }
  SUBCASE("latency never exceeds the system-side work") {
    // Same bound with the cache cold, on a call in the other direction.
    auto i2 = bed.call(b, a);
    bed.settle(ms(10'000));
    CHECK(ms(*bed.rec_of(i2).setup_latency_ms()) <= first);
  }
}

TEST_CASE("call chain") {
  Bed bed("DIST");
  auto i = bed.call(3, 7);
  bed.settle(ms(10'000));
  REQUIRE(bed.rec_of(i).outcome == Outcome::Established);
  const auto& hops = bed.ua.hops().at(bed.rec_of(i).call_id);
  const std::vector<std::pair<std::string, std::string>> expected{
      {"SIPh", "C-orig"}, {"C-orig", "H"},      {"H", "Diah"},      {"C-orig", "T-orig"},
      {"A-orig", "M"},    {"C-orig", "C-term"}, {"C-term", "T-term"}, {"SIPh", "UA-term"}};
  std::size_t at = 0;
  for (const auto& h : hops) {
    if (at < expected.size() && h == expected[at]) ++at;
  }
  CHECK(at == expected.size());
}

TEST_CASE("teardown releases every per-call unit") {
  Bed bed("DIST");
  auto i = bed.call(11, 12);
  bed.settle(ms(1000));
  CHECK(bed.dep.middleware().live_per_call_units() == 7);  // C, T, A on each side plus one M
  bed.settle(ms(10'000));
  CHECK(bed.rec_of(i).outcome == Outcome::Established);
  CHECK(bed.per_call_spawned() == 7);
  CHECK(bed.per_call_terminated() == 7);
  CHECK(bed.dep.middleware().live_per_call_units() == 0);
}

TEST_CASE("rejections") {
  Bed bed("DIST");
  SUBCASE("caller not registered") {
    auto i = bed.call(200, 5);
    bed.settle(ms(10'000));
    CHECK(bed.rec_of(i).final_status == 403);
    CHECK(bed.per_call_spawned() == 0);
  }
  SUBCASE("callee not registered") {
    auto i = bed.call(5, 200);
    bed.settle(ms(10'000));
    CHECK(bed.rec_of(i).outcome == Outcome::Failed);
    CHECK(bed.rec_of(i).final_status == 480);
    CHECK(bed.dep.middleware().live_per_call_units() == 0);
    CHECK(bed.per_call_spawned() == bed.per_call_terminated());
  }
  SUBCASE("callee unknown") {
    auto i = bed.ua.place_call(ims::user_name(5), "user9999", ms(2000));
    bed.settle(ms(10'000));
    CHECK(bed.rec_of(i).final_status == 404);
    CHECK(bed.dep.middleware().live_per_call_units() == 0);
  }
  SUBCASE("no common codec") {
    auto i = bed.call(5, 6, 2, "G729");
    bed.settle(ms(10'000));
    CHECK(bed.rec_of(i).final_status == 488);
    CHECK(bed.dep.middleware().live_per_call_units() == 0);
  }
  SUBCASE("BYE for an unknown dialog") {
    sip::SipMessage bye;
    bye.kind = sip::Kind::Request;
    bye.method = sip::Method::Bye;
    bye.request_uri = "sip:user0006@unity";
    bye.via = {"SIP/2.0/UDP user0005.ua.unity;branch=z9hG4bKnope"};
    bye.from = sip::NameAddr{"", "sip:user0005@unity", "x1", ""};
    bye.to = sip::NameAddr{"", "sip:user0006@unity", "y1", ""};
    bye.call_id = "no-such-call";
    bye.cseq = {2, sip::Method::Bye};
    bed.app.send_from_ua("sip:user0005@unity", sip::serialize_message(bye));
    bed.settle(ms(100));
    auto got = bed.rec.to("sip:user0005@unity");
    REQUIRE(!got.empty());
    CHECK(got.back().status_code == 481);
  }
  SUBCASE("BYE while ringing is an abandoned call") {
    Bed ringing(harness::resolve_descriptor("DIST"), quiet(5));
    auto i = ringing.ua.place_call(ims::user_name(5), ims::user_name(6), ms(2000), true);
    ringing.settle(ms(20'000));
    CHECK(ringing.rec_of(i).outcome == Outcome::Abandoned);
    CHECK(ringing.dep.middleware().live_per_call_units() == 0);
  }
}

TEST_CASE("registration") {
  Bed bed("DIST");
  CHECK(bed.store.registrations_ok == 199);
  CHECK(bed.app.registered().size() == 199);
  bed.ua.register_ua(ims::user_name(1));
  bed.ua.register_ua("user9999");
  bed.settle(ms(1000));
  CHECK(bed.store.registrations_ok == 200);
  CHECK(bed.store.registrations_failed == 1);
  CHECK(bed.app.hss().lookup(ims::impu_for("user0001")).binding.find("user0001.ua.unity") != std::string::npos);
  CHECK(bed.app.hss().size() == 200);
}

TEST_CASE("profile without the telephony trigger skips T") {
  std::string prov;
  for (int i = 1; i <= 10; ++i) prov += ims::impu_for(ims::user_name(i)) + "\t\n";
  Bed bed(harness::resolve_descriptor("DIST"), quiet(), 10, ims::parse_provisioning(prov));
  auto i = bed.call(1, 2);
  bed.settle(ms(10'000));
  CHECK(bed.rec_of(i).outcome == Outcome::Established);
  CHECK(bed.dep.middleware().counters().spawned[static_cast<std::size_t>(UnitType::T)] == 0);
  CHECK(bed.per_call_spawned() == 5);
}

TEST_CASE("pinned layout keeps every C on its CU") {
  Bed bed("NO3");
  std::vector<std::size_t> calls;
  for (int i = 1; i <= 20; ++i) calls.push_back(bed.call(i, 40 + i, 30));
  bed.settle(ms(5000));
  std::size_t c_units = 0;
  for (const auto& u : bed.dep.middleware().live_units()) {
    if (u.type != UnitType::C) continue;
    ++c_units;
    CHECK(u.pouch == 3);
  }
  CHECK(c_units == 40);
  bed.settle(ms(60'000));
  for (auto i : calls) CHECK(bed.rec_of(i).outcome == Outcome::Established);
}

TEST_CASE("codec negotiation follows the element manager") {
  Bed bed("DIST");
  auto answer_codecs = [&](std::size_t call) {
    for (const auto& m : bed.rec.to(ims::impu_for(bed.rec_of(call).caller))) {
      if (m.is_response() && m.status_code == 200 && m.cseq.method == sip::Method::Invite) {
        return sip::parse_sdp(m.body).codecs;
      }
    }
    return std::vector<sip::Codec>{};
  };
  auto i1 = bed.call(21, 22);
  bed.settle(ms(10'000));
  CHECK(answer_codecs(i1).front() == sip::Codec::PCMU);

  bed.dep.push_config({{"supported-codecs", "PCMA"}});
  bed.settle(ms(100));
  auto i2 = bed.call(23, 24);
  bed.settle(ms(10'000));
  CHECK(answer_codecs(i2) == std::vector<sip::Codec>{sip::Codec::PCMA});
}

TEST_CASE("debug logging adds entries") {
  auto lines = [](bool debug) {
    Bed bed("DIST");
    if (debug) bed.dep.push_config({{"log-level", "debug"}});
    bed.settle(ms(100));
    auto before = bed.dep.logs().size();
    bed.call(31, 32);
    bed.settle(ms(10'000));
    return bed.dep.logs().size() - before;
  };
  CHECK(lines(true) > lines(false));
}

TEST_CASE("media cadence") {
  auto d = harness::resolve_descriptor("DIST");
  d.costs.c_audit = Micros{0};
  Bed bed(d);
  auto i = bed.call(41, 42, 200);
  bed.settle(ms(250'000));
  REQUIRE(bed.rec_of(i).outcome == Outcome::Established);
  std::size_t frames = 0;
  std::vector<std::uint32_t> seen;
  for (const auto& s : bed.store.media) {
    if (s.call != i) continue;
    ++frames;
    seen.push_back(s.frame);
    CHECK(s.offset_us == 200);  // two legs at 0.1 ms, nothing else on the pouch
  }
  CHECK(frames >= 9999);
  CHECK(frames <= 10001);
  for (std::size_t k = 0; k < seen.size(); ++k) CHECK(seen[k] == k);
}

TEST_CASE("media shares its pouch with busy call sessions") {
  // Everything pinned onto CU1 except media, which shares CU2 with C.
  auto d = orch::parse_descriptor(
      "[pool cu]\npouches=2\n[deployment]\nmode=pinned\npin SIPh,NSS,H,Diah,A,T -> 1\npin C,M -> 2\n");
  Bed bed(d);
  auto i = bed.call(1, 2, 60);
  bed.settle(ms(2000));
  for (int k = 0; k < 40; ++k) {
    bed.call(3 + k, 100 + k, 5);
    bed.settle(ms(250));
  }
  bed.settle(ms(80'000));
  std::vector<double> offs;
  for (const auto& s : bed.store.media) {
    if (s.call == i) offs.push_back(s.offset_us);
  }
  REQUIRE(!offs.empty());
  CHECK(*std::max_element(offs.begin(), offs.end()) > *std::min_element(offs.begin(), offs.end()));
}

TEST_CASE("ad-hoc conference") {
  Bed bed("DIST");
  SUBCASE("subscriber with the service adds a third leg") {
    auto i = bed.call(10, 11, 30);  // user0010 has ADHOC-CONF
    bed.settle(ms(2000));
    REQUIRE(bed.media(i));
    CHECK(bed.media(i)->legs() == 2);
    CHECK_FALSE(bed.media(i)->mixing());
    CHECK(bed.ua.press_digits(i, "*3", ims::impu_for(ims::user_name(12))));
    bed.settle(ms(2000));
    CHECK(bed.media(i)->legs() == 3);
    CHECK(bed.media(i)->mixing());
    CHECK(bed.media(i)->frame_cost() == ms(0.45));
    bed.settle(ms(40'000));
    CHECK(bed.rec_of(i).outcome == Outcome::Established);
    CHECK(bed.dep.middleware().live_per_call_units() == 0);
  }
  SUBCASE("without the service nothing changes") {
    auto i = bed.call(11, 12, 30);
    bed.settle(ms(2000));
    bed.ua.press_digits(i, "*3", ims::impu_for(ims::user_name(13)));
    bed.settle(ms(2000));
    CHECK(bed.media(i)->legs() == 2);
  }
  SUBCASE("other digits are ignored") {
    auto i = bed.call(20, 21, 30);
    bed.settle(ms(2000));
    bed.ua.press_digits(i, "5", ims::impu_for(ims::user_name(13)));
    bed.settle(ms(2000));
    CHECK(bed.media(i)->legs() == 2);
  }
}

TEST_CASE("provisioning format round trip") {
  auto db = ims::generate_subscribers(200);
  CHECK(db.size() == 200);
  CHECK(db.lookup("sip:user0010@unity").has_adhoc_conf());
  CHECK_FALSE(db.lookup("sip:user0011@unity").has_adhoc_conf());
  CHECK(db.lookup("sip:user0011@unity").has_mmtel());
  auto text = ims::format_provisioning(db);
  auto again = ims::parse_provisioning(text);
  CHECK(ims::format_provisioning(again) == text);
  try {
    db.lookup("sip:nobody@unity");
    FAIL("lookup of an unknown impu succeeded");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::profile_not_found);
  }
}
