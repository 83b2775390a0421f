#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "cmw/middleware.hpp"
#include "ids/bus.hpp"
#include "ids/log_gatherer.hpp"
#include "nss/selector.hpp"
#include "orchestration/descriptor.hpp"
#include "sim/kernel.hpp"

namespace unity::orch {

struct ScaleDecision {
  enum class Action { None, AddPouch, RemovePouch };
  Action action = Action::None;
  std::string pool;
  PouchId pouch = 0;  // RemovePouch only
  double mean_utilization = 0.0;
  sim::Micros at{0};
};

struct PoolState {
  std::string id;
  int live = 0;
  int initial = 0;
  int max = 0;
  std::vector<PouchId> empty_pouches;  // live, unit-free
};

// Threshold/cooldown policy. Pinned deployments never scale. Adds go to the
// pool with the most headroom; removals take the highest-numbered empty
// pouch of a pool that is above its initial size.
ScaleDecision elasticity_tick(DeploymentMode mode, const Elasticity& policy, const std::vector<double>& utilizations,
                              const std::vector<PoolState>& pools, sim::Micros now,
                              std::optional<sim::Micros> last_action);

// Keys the element manager accepts.
const std::vector<std::string>& config_keys();
std::map<std::string, std::string> default_unit_config();

// A deployed system: pouches with one CMW each, the node selector, the
// orchestrator's monitoring and elasticity loop and the element manager.
class Deployment {
 public:
  Deployment(Descriptor descriptor, std::uint64_t seed);
  ~Deployment();

  Deployment(const Deployment&) = delete;
  Deployment& operator=(const Deployment&) = delete;

  // Register IMS unit factories here before start().
  cmw::FactoryRegistry& factories() noexcept { return factories_; }
  // Spawns the base service units and starts the orchestrator loop.
  void start();

  const Descriptor& descriptor() const noexcept { return descriptor_; }
  const CostModel& costs() const noexcept { return descriptor_.costs; }
  sim::Kernel& kernel() noexcept { return kernel_; }
  ids::Bus& bus() noexcept { return bus_; }
  ids::LogGatherer& logs() noexcept { return logs_; }
  cmw::Middleware& middleware() noexcept { return mw_; }
  nss::NodeSelector& selector() noexcept { return *selector_; }

  // Element manager: validated config published on global-config.
  void push_config(const std::map<std::string, std::string>& values);
  const std::map<std::string, std::string>& unit_config() const noexcept { return config_; }

  // Fault injection: the pouch dies with everything on it.
  void kill_pouch(PouchId pouch);

  const std::vector<ScaleDecision>& scale_history() const noexcept { return history_; }
  std::vector<PoolState> pool_states() const;
  const std::map<UnitType, UnitAddress>& base_units() const noexcept { return base_; }
  std::vector<PouchId> pouches_of_pool(const std::string& pool) const;
  // Pouch ids that have ever belonged to `pool`, including dead ones.
  const std::map<PouchId, std::string>& pouch_pools() const noexcept { return pouch_pool_; }

 private:
  PouchId add_pouch(const Pool& pool);
  void place_base_unit(UnitType type);
  void mmo_tick();
  void mmo_log(PouchId pouch, ids::Severity severity, std::string text);
  void apply(const ScaleDecision& d);

  Descriptor descriptor_;
  sim::Kernel kernel_;
  ids::Bus bus_;
  ids::LogGatherer logs_;
  cmw::FactoryRegistry factories_;
  cmw::Middleware mw_;
  std::unique_ptr<nss::NodeSelector> selector_;
  std::map<std::string, std::string> config_;
  std::map<PouchId, std::string> pouch_pool_;
  std::map<UnitType, std::vector<PouchId>> pinned_;
  std::map<UnitType, UnitAddress> base_;

  // Orchestrator view of the resource-utilization stream.
  struct Report {
    double utilization = 0.0;
    sim::Micros at{0};
  };
  std::map<PouchId, Report> reports_;
  std::map<PouchId, bool> declared_down_;
  std::optional<sim::Micros> last_scale_;
  std::vector<ScaleDecision> history_;
};

}  // namespace unity::orch
