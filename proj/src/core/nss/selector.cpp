#include "nss/selector.hpp"

#include "common/error.hpp"
#include "common/hash.hpp"

namespace unity::nss {

void LoadView::add_pouch(PouchId pouch, sim::Micros now) { entries_.try_emplace(pouch, Entry{0.0, now}); }

void LoadView::remove_pouch(PouchId pouch) { entries_.erase(pouch); }

void LoadView::update(const ids::UtilizationSample& sample) {
  auto it = entries_.find(sample.pouch);
  if (it == entries_.end()) throw Error(Errc::unknown_pouch, "pouch " + std::to_string(sample.pouch));
  it->second = Entry{std::clamp(sample.utilization, 0.0, 1.0), sample.at};
}

double LoadView::utilization(PouchId pouch, sim::Micros now) const {
  auto it = entries_.find(pouch);
  if (it == entries_.end()) throw Error(Errc::unknown_pouch, "pouch " + std::to_string(pouch));
  if (now - it->second.at > 3 * interval_) return 1.0;
  return it->second.utilization;
}

std::vector<PouchId> LoadView::pouches() const {
  std::vector<PouchId> out;
  out.reserve(entries_.size());
  for (const auto& [id, e] : entries_) out.push_back(id);
  return out;
}

PouchId select_pouch(std::string_view subscriber, UnitType type, const LoadView& view, sim::Micros now,
                     const PlacementPolicy& policy) {
  std::vector<PouchId> eligible;
  if (policy.mode == PlacementMode::Pinned) {
    auto it = policy.pinned.find(type);
    if (it != policy.pinned.end()) {
      for (PouchId p : it->second) {
        if (view.contains(p)) eligible.push_back(p);
      }
    }
    std::sort(eligible.begin(), eligible.end());
    eligible.erase(std::unique(eligible.begin(), eligible.end()), eligible.end());
  } else {
    eligible = view.pouches();
  }
  if (eligible.empty()) {
    throw Error(Errc::no_eligible_pouch, "no live pouch may host " + std::string(unit_type_name(type)));
  }

  const std::size_t n = eligible.size();
  const std::size_t home = fnv1a64(subscriber) % n;
  if (view.utilization(eligible[home], now) <= policy.overload_threshold) return eligible[home];

  std::size_t best = home;
  double best_load = view.utilization(eligible[home], now);
  for (std::size_t i = 1; i < n; ++i) {
    std::size_t idx = (home + i) % n;
    double u = view.utilization(eligible[idx], now);
    if (u <= policy.overload_threshold) return eligible[idx];
    if (u < best_load) {
      best = idx;
      best_load = u;
    }
  }
  return eligible[best];
}

void NodeSelector::consume(const ids::Message& m) {
  if (auto* s = std::get_if<ids::UtilizationSample>(&m)) {
    if (view_.contains(s->pouch)) view_.update(*s);
  } else if (auto* st = std::get_if<ids::SystemStatus>(&m)) {
    if (st->kind == ids::SystemStatus::Kind::PouchUp) {
      view_.add_pouch(st->pouch, kernel_.now());
    } else {
      view_.remove_pouch(st->pouch);
    }
  }
}

void NssAgent::on_start() {
  auto here = sim::Endpoint::at(address().pouch);
  auto& bus = middleware().bus();
  auto self = address();
  auto& mw = middleware();
  auto feed = [&sel = selector_, &mw, self](const ids::Message& m) {
    if (mw.is_alive(self)) sel.consume(m);
  };
  bus.subscribe(ids::topics::kResourceUtilization, here, feed);
  bus.subscribe(ids::topics::kSystemStatus, here, feed);
}

}  // namespace unity::nss
