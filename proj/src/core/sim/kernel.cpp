#include "sim/kernel.hpp"

#include <algorithm>
#include <cmath>

#include "common/error.hpp"

namespace unity::sim {

Kernel::Kernel(std::uint64_t seed, NetworkModel net) : net_(net), random_(seed) {}

EventId Kernel::schedule(Micros at, std::function<void()> fn) {
  if (at < now_) {
    throw Error(Errc::scheduling_in_past,
                "event at " + std::to_string(at.count()) + "us, now " + std::to_string(now_.count()) + "us");
  }
  std::uint32_t slot;
  if (!free_slots_.empty()) {
    slot = free_slots_.back();
    free_slots_.pop_back();
  } else {
    slot = static_cast<std::uint32_t>(slots_.size());
    slots_.emplace_back();
  }
  auto& s = slots_[slot];
  s.fn = std::move(fn);
  s.armed = true;
  heap_.push_back({at, seq_++, slot});
  std::push_heap(heap_.begin(), heap_.end(), HeapLater{});
  return (static_cast<EventId>(s.generation) << 32) | slot;
}

bool Kernel::cancel(EventId id) {
  auto slot = static_cast<std::uint32_t>(id & 0xffffffffu);
  auto gen = static_cast<std::uint32_t>(id >> 32);
  if (slot >= slots_.size()) return false;
  auto& s = slots_[slot];
  if (!s.armed || s.generation != gen) return false;
  s.armed = false;
  s.fn = nullptr;
  return true;
}

RunStats Kernel::run_until(Micros t_end) {
  RunStats stats;
  while (!heap_.empty() && heap_.front().at <= t_end) {
    std::pop_heap(heap_.begin(), heap_.end(), HeapLater{});
    HeapEntry e = heap_.back();
    heap_.pop_back();
    auto& s = slots_[e.slot];
    bool armed = s.armed;
    std::function<void()> fn = std::move(s.fn);
    s.fn = nullptr;
    s.armed = false;
    ++s.generation;
    free_slots_.push_back(e.slot);
    if (!armed) continue;
    now_ = e.at;
    ++processed_;
    ++stats.processed;
    if (fn) fn();
  }
  if (t_end > now_) now_ = t_end;
  stats.now = now_;
  return stats;
}

PouchId Kernel::add_pouch(std::string pool, double speed) {
  PouchState p;
  p.host.id = static_cast<PouchId>(pouches_.size() + 1);
  p.host.pool = std::move(pool);
  p.host.speed = speed;
  p.host.busy_until = now_;
  pouches_.push_back(std::move(p));
  return pouches_.back().host.id;
}

void Kernel::kill_pouch(PouchId id) {
  if (!has_pouch(id)) throw Error(Errc::unknown_endpoint, "pouch " + std::to_string(id));
  pouches_[id - 1].host.alive = false;
}

const PouchHost& Kernel::pouch(PouchId id) const {
  if (!has_pouch(id)) throw Error(Errc::unknown_endpoint, "pouch " + std::to_string(id));
  return pouches_[id - 1].host;
}

std::vector<PouchId> Kernel::pouch_ids() const {
  std::vector<PouchId> ids;
  for (const auto& p : pouches_) ids.push_back(p.host.id);
  return ids;
}

std::vector<PouchId> Kernel::live_pouch_ids() const {
  std::vector<PouchId> ids;
  for (const auto& p : pouches_) {
    if (p.host.alive) ids.push_back(p.host.id);
  }
  return ids;
}

Micros Kernel::execute_work(PouchId id, Micros cost, std::function<void()> completion) {
  if (!has_pouch(id)) throw Error(Errc::unknown_endpoint, "pouch " + std::to_string(id));
  auto& p = pouches_[id - 1];
  if (!p.host.alive) throw Error(Errc::pouch_dead, "pouch " + std::to_string(id));
  Micros scaled{static_cast<std::int64_t>(std::llround(static_cast<double>(cost.count()) / p.host.speed))};
  Micros start = std::max(now_, p.host.busy_until);
  Micros done = start + scaled;
  p.host.busy_until = done;
  p.host.cumulative_busy += scaled;

  if (scaled.count() > 0) {
    if (!p.busy.empty() && p.busy.back().end == start) {
      p.busy.back().end = done;
    } else {
      Micros before = p.busy.empty() ? Micros{0} : p.busy.back().before + (p.busy.back().end - p.busy.back().start);
      p.busy.push_back({start, done, before});
    }
    while (p.busy.size() > 1 && p.busy.front().end < now_ - retention_) p.busy.pop_front();
  }

  if (completion) {
    schedule(done, [this, id, fn = std::move(completion)] {
      if (pouches_[id - 1].host.alive) fn();
    });
  }
  return done;
}

Micros Kernel::busy_before(const PouchState& p, Micros t) const {
  if (p.busy.empty()) return Micros{0};
  auto it = std::upper_bound(p.busy.begin(), p.busy.end(), t,
                             [](Micros v, const BusyInterval& b) { return v < b.start; });
  if (it == p.busy.begin()) return p.busy.front().before;
  --it;
  return it->before + (std::min(t, it->end) - it->start);
}

double Kernel::cpu_utilization(PouchId id, Micros window) const {
  if (!has_pouch(id)) throw Error(Errc::unknown_endpoint, "pouch " + std::to_string(id));
  if (window.count() <= 0 || window > now_ || window > retention_) {
    throw Error(Errc::window_too_large, std::to_string(window.count()) + "us window");
  }
  const auto& p = pouches_[id - 1];
  Micros busy = busy_before(p, now_) - busy_before(p, now_ - window);
  double u = static_cast<double>(busy.count()) / static_cast<double>(window.count());
  return std::clamp(u, 0.0, 1.0);
}

void Kernel::check_endpoint(Endpoint e) const {
  if (e.kind == Endpoint::Kind::Pouch && !has_pouch(e.pouch)) {
    throw Error(Errc::unknown_endpoint, "pouch " + std::to_string(e.pouch));
  }
}

Micros Kernel::delay(Endpoint from, Endpoint to) const {
  check_endpoint(from);
  check_endpoint(to);
  if (from.kind == Endpoint::Kind::Ua || to.kind == Endpoint::Kind::Ua) return net_.ua;
  if (from.kind == Endpoint::Kind::Pouch && to.kind == Endpoint::Kind::Pouch && from.pouch == to.pouch) {
    return net_.intra;
  }
  return net_.inter;
}

EventId Kernel::transmit(Endpoint from, Endpoint to, std::function<void()> deliver) {
  return transmit(from, to, std::move(deliver), now_);
}

EventId Kernel::transmit(Endpoint from, Endpoint to, std::function<void()> deliver, Micros not_before) {
  Micros at = std::max(now_ + delay(from, to), not_before);
  return schedule(at, [this, to, fn = std::move(deliver)] {
    if (to.kind == Endpoint::Kind::Pouch && !pouches_[to.pouch - 1].host.alive) {
      ++dropped_;
      return;
    }
    fn();
  });
}

}  // namespace unity::sim
