#pragma once

#include <map>
#include <string_view>
#include <vector>

#include "cmw/middleware.hpp"
#include "common/address.hpp"
#include "ids/messages.hpp"
#include "sim/time.hpp"

namespace unity::nss {

enum class PlacementMode { StickyHash, Pinned };

struct PlacementPolicy {
  PlacementMode mode = PlacementMode::StickyHash;
  double overload_threshold = 0.85;
  std::map<UnitType, std::vector<PouchId>> pinned;  // pinned mode only
};

// Latest utilization sample per live pouch. Samples older than three
// monitoring intervals read as fully loaded.
class LoadView {
 public:
  explicit LoadView(sim::Micros monitoring_interval = sim::Micros{1'000'000}) : interval_(monitoring_interval) {}

  void add_pouch(PouchId pouch, sim::Micros now);
  void remove_pouch(PouchId pouch);
  bool contains(PouchId pouch) const { return entries_.count(pouch) != 0; }
  // Throws Errc::unknown_pouch for an unregistered pouch.
  void update(const ids::UtilizationSample& sample);
  double utilization(PouchId pouch, sim::Micros now) const;
  std::vector<PouchId> pouches() const;

 private:
  struct Entry {
    double utilization = 0.0;
    sim::Micros at{0};
  };
  sim::Micros interval_;
  std::map<PouchId, Entry> entries_;
};

// Sticky placement: the subscriber's home is eligible[FNV-1a-64(id) mod n]
// over the eligible pouches sorted by id; an overloaded home overflows to
// the next pouch under the threshold, or the least-loaded one.
PouchId select_pouch(std::string_view subscriber, UnitType type, const LoadView& view, sim::Micros now,
                     const PlacementPolicy& policy);

// The selector shared by units that place per-call work (SIPh, C, A).
class NodeSelector {
 public:
  NodeSelector(sim::Kernel& kernel, PlacementPolicy policy, sim::Micros monitoring_interval)
      : kernel_(kernel), policy_(std::move(policy)), view_(monitoring_interval) {}

  PouchId select(std::string_view subscriber, UnitType type) const {
    return select_pouch(subscriber, type, view_, kernel_.now(), policy_);
  }
  LoadView& view() noexcept { return view_; }
  const PlacementPolicy& policy() const noexcept { return policy_; }

  // Applies an IDS message relevant to placement (samples, pouch status).
  void consume(const ids::Message& m);

 private:
  sim::Kernel& kernel_;
  PlacementPolicy policy_;
  LoadView view_;
};

// The NSS agent unit: keeps the shared selector's load view fed from IDS.
class NssAgent : public cmw::Unit {
 public:
  explicit NssAgent(NodeSelector& selector) : selector_(selector) {}

  sim::Micros cost_of(const cmw::Envelope&) override { return sim::Micros{0}; }
  void handle(const cmw::Envelope&) override {}
  void on_start() override;

 private:
  NodeSelector& selector_;
};

}  // namespace unity::nss
