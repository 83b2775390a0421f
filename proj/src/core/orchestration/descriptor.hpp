#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "common/address.hpp"
#include "sim/kernel.hpp"

namespace unity::orch {

// Service times at reference speed (1.0). Every entry is overridable from a
// descriptor's [costs] section as `<key>_ms`.
struct CostModel {
  sim::Micros sip_route{1000};
  sim::Micros c_step{2000};
  sim::Micros h_query{1000};
  sim::Micros h_cache_hit{100};
  sim::Micros diah_hss{1500};
  sim::Micros a_negotiate{500};
  sim::Micros t_event{300};
  sim::Micros m_frame_leg{100};
  sim::Micros spawn{500};
  sim::Micros bye{500};
  // Periodic audit run by every live C unit; the cost is per session held
  // on the same pouch.
  sim::Micros c_audit{125};
  sim::Micros c_audit_interval{12'500'000};

  // Returns false for an unknown key.
  bool set(std::string_view key, double ms);
  static std::vector<std::string> keys();
};

struct Pool {
  std::string id;
  int initial = 0;
  int max = 0;
  double speed = 1.0;
};

enum class DeploymentMode { Pinned, Distributed };

// One `pin` group: a set of unit types and every pouch ordinal it owns.
struct PinGroup {
  std::vector<UnitType> types;
  std::vector<int> ordinals;
};

struct Elasticity {
  double cpu_high = 0.80;
  double cpu_low = 0.30;
  sim::Micros cooldown{5'000'000};
};

struct Descriptor {
  std::vector<Pool> pools;
  DeploymentMode mode = DeploymentMode::Distributed;
  std::vector<PinGroup> pin_map;
  Elasticity elasticity;
  CostModel costs;
  sim::NetworkModel network;
  sim::Micros monitoring_interval{1'000'000};
  double overload_threshold = 0.85;

  int initial_pouch_count() const;
  // Pouch ordinals (1-based, across pools in file order) allowed per type.
  std::map<UnitType, std::vector<int>> pinned_ordinals() const;
};

Descriptor parse_descriptor(std::string_view text);

// Canonical one-line rendering of the pin map, e.g. "SIPh,NSS->1 H,Diah->2".
std::string format_pin_map(const Descriptor& d);

}  // namespace unity::orch
