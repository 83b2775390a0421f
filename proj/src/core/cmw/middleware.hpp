#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "common/address.hpp"
#include "ids/bus.hpp"
#include "sim/kernel.hpp"

namespace unity::cmw {

// Base for everything units send to each other.
struct Payload {
  virtual ~Payload() = default;
};
using PayloadPtr = std::shared_ptr<const Payload>;

struct Envelope {
  UnitAddress from;  // invalid (instance 0) when sent from outside the system
  UnitAddress to;
  PayloadPtr payload;
  sim::Micros enqueued{0};
};

class Middleware;

// An actor. Handlers run to completion, one at a time per pouch.
class Unit {
 public:
  virtual ~Unit() = default;

  const UnitAddress& address() const noexcept { return address_; }

  // CPU cost at reference speed of handling `env`, evaluated on delivery.
  virtual sim::Micros cost_of(const Envelope& env) = 0;
  virtual void handle(const Envelope& env) = 0;
  // Called when the unit is started on its pouch (after spawn).
  virtual void on_start() {}

 protected:
  Middleware& middleware() const noexcept { return *mw_; }

 private:
  friend class Middleware;
  UnitAddress address_;
  Middleware* mw_ = nullptr;
  std::size_t pending_ = 0;
};

struct InitParams {
  std::string subscriber;
  std::string call_id;
  std::string role;  // e.g. "orig" / "term" for per-call units
};

using UnitFactory = std::function<std::unique_ptr<Unit>(const InitParams&)>;

class FactoryRegistry {
 public:
  void add(UnitType type, UnitFactory factory) { factories_[type] = std::move(factory); }
  bool has(UnitType type) const { return factories_.count(type) != 0; }
  std::unique_ptr<Unit> create(UnitType type, const InitParams& params) const;

 private:
  std::map<UnitType, UnitFactory> factories_;
};

// Maps service keys to registered unit addresses, maintained from the
// resolving-updates stream.
class ResolveTable {
 public:
  void apply(const ids::ResolvingUpdate& u);
  void drop_pouch(PouchId pouch);
  // Round-robin over the live entries for `key`.
  UnitAddress resolve(const std::string& key);
  const std::vector<UnitAddress>* entries(const std::string& key) const;

 private:
  struct Entry {
    std::vector<UnitAddress> addresses;
    std::size_t cursor = 0;
  };
  std::map<std::string, Entry> table_;
};

class CmwInstance {
 public:
  PouchId pouch() const noexcept { return pouch_; }
  ResolveTable& resolve_table() noexcept { return table_; }
  const std::map<std::string, std::string>& config() const noexcept { return config_; }
  std::string config_value(const std::string& key, const std::string& fallback = {}) const;
  std::size_t unit_count() const noexcept { return unit_count_; }
  std::size_t unit_count(UnitType type) const noexcept { return type_counts_[static_cast<std::size_t>(type)]; }
  std::uint64_t dead_letters() const noexcept { return dead_letters_; }
  sim::Micros monitoring_interval() const noexcept { return interval_; }

 private:
  friend class Middleware;
  PouchId pouch_ = 0;
  ResolveTable table_;
  std::map<std::string, std::string> config_;
  std::size_t unit_count_ = 0;
  std::array<std::size_t, 8> type_counts_{};
  std::uint64_t dead_letters_ = 0;
  sim::Micros interval_{1'000'000};
  std::vector<ids::SubscriptionId> subscriptions_;
};

struct Counters {
  std::array<std::uint64_t, 8> spawned{};
  std::array<std::uint64_t, 8> terminated{};
  std::array<std::uint64_t, 8> lost{};  // destroyed with their pouch
  std::uint64_t sent = 0;
  std::uint64_t handled = 0;
  std::uint64_t dead_letters = 0;

  std::uint64_t in_flight() const noexcept { return sent - handled - dead_letters; }
};

// Service key under which a unit type is resolvable, if any.
std::optional<std::string> service_key(UnitType type);
bool is_per_call(UnitType type) noexcept;

// One CmwInstance per pouch plus the system-wide unit directory.
class Middleware {
 public:
  using PlacementCheck = std::function<bool(UnitType, PouchId)>;

  Middleware(sim::Kernel& kernel, ids::Bus& bus, FactoryRegistry& factories);

  Middleware(const Middleware&) = delete;
  Middleware& operator=(const Middleware&) = delete;

  sim::Kernel& kernel() noexcept { return kernel_; }
  ids::Bus& bus() noexcept { return bus_; }

  CmwInstance& attach_pouch(PouchId pouch, sim::Micros monitoring_interval,
                            std::map<std::string, std::string> config = {});
  bool has_instance(PouchId pouch) const { return instances_.count(pouch) != 0; }
  CmwInstance& instance(PouchId pouch);

  void set_spawn_cost(sim::Micros cost) noexcept { spawn_cost_ = cost; }
  void set_placement_check(PlacementCheck check) { placement_check_ = std::move(check); }

  UnitAddress spawn_unit(PouchId pouch, UnitType type, const InitParams& params = {});
  // Idempotent: terminating an unknown or already-terminated unit is a no-op.
  void terminate_unit(const UnitAddress& addr);
  void send(const UnitAddress& from, const UnitAddress& to, PayloadPtr payload);
  // Delivery from outside the pouch fabric (user agents, control plane).
  void send_external(sim::Endpoint from, const UnitAddress& to, PayloadPtr payload);

  UnitAddress resolve(PouchId asking_pouch, const std::string& key);
  bool is_alive(const UnitAddress& addr) const;
  Unit* find(InstanceId id);
  std::vector<UnitAddress> live_units(std::optional<PouchId> pouch = std::nullopt) const;

  // Kills the pouch: every unit on it is destroyed and its queued messages
  // become dead letters.
  void kill_pouch(PouchId pouch);
  // Publishes the full resolve table so late subscribers can bootstrap.
  void publish_resolve_snapshot();

  void log(const UnitAddress& from, ids::Severity severity, const std::string& call_id, std::string text);
  bool log_enabled(PouchId pouch, ids::Severity severity) const;

  const Counters& counters() const noexcept { return counters_; }
  std::uint64_t live_per_call_units() const;

 private:
  void deliver(const Envelope& env);
  void start_monitoring(PouchId pouch);
  void publish_stats(PouchId pouch);

  sim::Kernel& kernel_;
  ids::Bus& bus_;
  FactoryRegistry& factories_;
  std::map<PouchId, CmwInstance> instances_;
  std::unordered_map<InstanceId, std::unique_ptr<Unit>> units_;
  InstanceId next_instance_ = 1;
  sim::Micros spawn_cost_{500};
  PlacementCheck placement_check_;
  Counters counters_;
};

}  // namespace unity::cmw
