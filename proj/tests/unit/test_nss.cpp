#include <doctest.h>

#include <array>
#include <cstdio>
#include <string>
#include <vector>

#include "common/error.hpp"
#include "common/hash.hpp"
#include "nss/selector.hpp"

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

// Shift-and-add form of the FNV-1a step: h * (2^40 + 2^8 + 0xb3).
std::uint64_t fnv_reference(const std::string& s) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : s) {
    h ^= c;
    h = (h << 40) + (h << 8) + h * 0xb3;
  }
  return h;
}

std::string user(int i) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "user%04d", i);
  return buf;
}

nss::LoadView view_of(int pouches, Micros now = Micros{0}) {
  nss::LoadView v;
  for (int i = 1; i <= pouches; ++i) v.add_pouch(static_cast<PouchId>(i), now);
  return v;
}

void set_load(nss::LoadView& v, PouchId p, double u, Micros at = Micros{0}) {
  ids::UtilizationSample s;
  s.pouch = p;
  s.utilization = u;
  s.at = at;
  v.update(s);
}

}  // namespace

TEST_CASE("hash matches published FNV-1a vectors") {
  CHECK(fnv1a64("") == 0xcbf29ce484222325ULL);
  CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
  CHECK(fnv1a64("foobar") == 0x85944171f73967e8ULL);
  for (int i = 1; i <= 200; ++i) CHECK(fnv1a64(user(i)) == fnv_reference(user(i)));
}

TEST_CASE("200 subscribers over 8 pouches") {
  // Frozen from an independent computation of the hash.
  const std::array<int, 8> expected{25, 24, 25, 25, 26, 26, 24, 25};
  auto v = view_of(8);
  std::array<int, 8> got{};
  for (int i = 1; i <= 200; ++i) {
    auto p = nss::select_pouch(user(i), UnitType::C, v, Micros{0}, {});
    CHECK(p == fnv_reference(user(i)) % 8 + 1);
    ++got[p - 1];
  }
  CHECK(got == expected);
}

TEST_CASE("stickiness") {
  auto v = view_of(6);
  set_load(v, 3, 0.5);
  set_load(v, 5, 0.2);
  for (int i = 1; i <= 50; ++i) {
    auto first = nss::select_pouch(user(i), UnitType::C, v, Micros{0}, {});
    CHECK(nss::select_pouch(user(i), UnitType::A, v, Micros{0}, {}) == first);
    CHECK(nss::select_pouch(user(i), UnitType::C, v, Micros{0}, {}) == first);
  }
}

TEST_CASE("overflow") {
  auto v = view_of(8);
  const std::string who = user(1);
  const PouchId home = static_cast<PouchId>(fnv_reference(who) % 8 + 1);
  const PouchId next = home % 8 + 1;

  SUBCASE("overloaded home goes to the next pouch") {
    set_load(v, home, 0.9);
    set_load(v, next, 0.2);
    CHECK(nss::select_pouch(who, UnitType::C, v, Micros{0}, {}) == next);
  }
  SUBCASE("walk skips busy pouches and wraps") {
    for (PouchId p = 1; p <= 8; ++p) set_load(v, p, 0.95);
    const PouchId target = home == 1 ? 8 : home - 1;  // last one on the walk
    set_load(v, target, 0.5);
    CHECK(nss::select_pouch(who, UnitType::C, v, Micros{0}, {}) == target);
  }
  SUBCASE("all overloaded picks the least loaded") {
    for (PouchId p = 1; p <= 8; ++p) set_load(v, p, 0.9 + 0.01 * p);
    set_load(v, 6, 0.86);
    CHECK(nss::select_pouch(who, UnitType::C, v, Micros{0}, {}) == 6);
  }
  SUBCASE("threshold itself is not overload") {
    set_load(v, home, 0.85);
    CHECK(nss::select_pouch(who, UnitType::C, v, Micros{0}, {}) == home);
  }
}

TEST_CASE("pinned mode") {
  auto v = view_of(8);
  nss::PlacementPolicy pol;
  pol.mode = nss::PlacementMode::Pinned;
  pol.pinned[UnitType::C] = {3};
  pol.pinned[UnitType::M] = {8, 6, 7};
  for (int i = 1; i <= 200; ++i) {
    CHECK(nss::select_pouch(user(i), UnitType::C, v, Micros{0}, pol) == 3);
    auto m = nss::select_pouch(user(i), UnitType::M, v, Micros{0}, pol);
    CHECK(m == std::array<PouchId, 3>{6, 7, 8}[fnv_reference(user(i)) % 3]);
  }
  CHECK(code_of([&] { nss::select_pouch("x", UnitType::T, v, Micros{0}, pol); }) == Errc::no_eligible_pouch);
  v.remove_pouch(3);
  CHECK(code_of([&] { nss::select_pouch("x", UnitType::C, v, Micros{0}, pol); }) == Errc::no_eligible_pouch);
}

TEST_CASE("never a dead pouch") {
  auto v = view_of(8);
  v.remove_pouch(2);
  v.remove_pouch(5);
  for (int i = 1; i <= 200; ++i) {
    auto p = nss::select_pouch(user(i), UnitType::C, v, Micros{0}, {});
    CHECK(p != 2);
    CHECK(p != 5);
  }
  nss::LoadView empty;
  CHECK(code_of([&] { nss::select_pouch("x", UnitType::C, empty, Micros{0}, {}); }) == Errc::no_eligible_pouch);
}

TEST_CASE("load view") {
  nss::LoadView v(ms(1000));
  v.add_pouch(1, Micros{0});
  set_load(v, 1, 0.3, ms(1000));
  CHECK(v.utilization(1, ms(1000)) == 0.3);
  CHECK(v.utilization(1, ms(4000)) == 0.3);
  CHECK(v.utilization(1, ms(4500)) == 1.0);  // silent for 3.5 intervals
  CHECK(code_of([&] { set_load(v, 2, 0.1); }) == Errc::unknown_pouch);
  v.remove_pouch(1);
  CHECK(code_of([&] { set_load(v, 1, 0.1); }) == Errc::unknown_pouch);
}

TEST_CASE("stale pouches are avoided") {
  nss::LoadView v(ms(1000));
  for (PouchId p = 1; p <= 4; ++p) v.add_pouch(p, Micros{0});
  const std::string who = user(7);
  const PouchId home = static_cast<PouchId>(fnv_reference(who) % 4 + 1);
  for (PouchId p = 1; p <= 4; ++p) {
    if (p != home) set_load(v, p, 0.1, ms(9000));
  }
  CHECK(nss::select_pouch(who, UnitType::C, v, ms(9000), {}) == home % 4 + 1);
}
