#include "cmw/middleware.hpp"

#include <algorithm>

#include "common/error.hpp"

namespace unity::cmw {

std::unique_ptr<Unit> FactoryRegistry::create(UnitType type, const InitParams& params) const {
  auto it = factories_.find(type);
  if (it == factories_.end()) throw Error(Errc::unknown_unit_type, std::string(unit_type_name(type)));
  return it->second(params);
}

void ResolveTable::apply(const ids::ResolvingUpdate& u) {
  using Op = ids::ResolvingUpdate::Op;
  switch (u.op) {
    case Op::Add: {
      auto& list = table_[u.service_key].addresses;
      if (std::find(list.begin(), list.end(), u.address) == list.end()) list.push_back(u.address);
      break;
    }
    case Op::Remove: {
      auto& list = table_[u.service_key].addresses;
      std::erase(list, u.address);
      break;
    }
    case Op::Snapshot: {
      for (auto& [key, entry] : table_) entry.addresses.clear();
      for (const auto& [key, addr] : u.table) table_[key].addresses.push_back(addr);
      break;
    }
  }
}

void ResolveTable::drop_pouch(PouchId pouch) {
  for (auto& [key, entry] : table_) {
    std::erase_if(entry.addresses, [pouch](const UnitAddress& a) { return a.pouch == pouch; });
  }
}

UnitAddress ResolveTable::resolve(const std::string& key) {
  auto it = table_.find(key);
  if (it == table_.end()) throw Error(Errc::service_unknown, key);
  auto& e = it->second;
  if (e.addresses.empty()) throw Error(Errc::no_live_instance, key);
  auto addr = e.addresses[e.cursor % e.addresses.size()];
  e.cursor = (e.cursor + 1) % e.addresses.size();
  return addr;
}

const std::vector<UnitAddress>* ResolveTable::entries(const std::string& key) const {
  auto it = table_.find(key);
  return it == table_.end() ? nullptr : &it->second.addresses;
}

std::string CmwInstance::config_value(const std::string& key, const std::string& fallback) const {
  auto it = config_.find(key);
  return it == config_.end() ? fallback : it->second;
}

std::optional<std::string> service_key(UnitType type) {
  switch (type) {
    case UnitType::SIPh: return "SIPh";
    case UnitType::NssAgent: return "NSS";
    case UnitType::H: return "HSS-frontend";
    case UnitType::Diah: return "Diameter";
    default: return std::nullopt;
  }
}

bool is_per_call(UnitType type) noexcept {
  return type == UnitType::C || type == UnitType::A || type == UnitType::T || type == UnitType::M;
}

Middleware::Middleware(sim::Kernel& kernel, ids::Bus& bus, FactoryRegistry& factories)
    : kernel_(kernel), bus_(bus), factories_(factories) {}

CmwInstance& Middleware::attach_pouch(PouchId pouch, sim::Micros monitoring_interval,
                                      std::map<std::string, std::string> config) {
  if (instances_.count(pouch)) {
    throw Error(Errc::duplicate_cmw, "pouch " + std::to_string(pouch) + " already runs a CMW");
  }
  if (!kernel_.pouch_alive(pouch)) throw Error(Errc::pouch_dead, "pouch " + std::to_string(pouch));
  auto& inst = instances_[pouch];
  inst.pouch_ = pouch;
  inst.interval_ = monitoring_interval;
  inst.config_ = std::move(config);

  auto here = sim::Endpoint::at(pouch);
  inst.subscriptions_.push_back(bus_.subscribe(ids::topics::kResolvingUpdates, here, [this, pouch](const ids::Message& m) {
    if (auto* u = std::get_if<ids::ResolvingUpdate>(&m)) instances_.at(pouch).table_.apply(*u);
  }));
  inst.subscriptions_.push_back(bus_.subscribe(ids::topics::kSystemStatus, here, [this, pouch](const ids::Message& m) {
    auto* s = std::get_if<ids::SystemStatus>(&m);
    if (s && s->kind != ids::SystemStatus::Kind::PouchUp) instances_.at(pouch).table_.drop_pouch(s->pouch);
  }));
  inst.subscriptions_.push_back(bus_.subscribe(ids::topics::kGlobalConfig, here, [this, pouch](const ids::Message& m) {
    if (auto* c = std::get_if<ids::ConfigUpdate>(&m)) {
      for (const auto& [k, v] : c->values) instances_.at(pouch).config_[k] = v;
    }
  }));
  start_monitoring(pouch);
  return inst;
}

CmwInstance& Middleware::instance(PouchId pouch) {
  auto it = instances_.find(pouch);
  if (it == instances_.end()) throw Error(Errc::unknown_endpoint, "no CMW on pouch " + std::to_string(pouch));
  return it->second;
}

UnitAddress Middleware::spawn_unit(PouchId pouch, UnitType type, const InitParams& params) {
  if (!kernel_.pouch_alive(pouch) || !instances_.count(pouch)) {
    throw Error(Errc::pouch_dead, "cannot spawn " + std::string(unit_type_name(type)) + " on pouch " + std::to_string(pouch));
  }
  if (!factories_.has(type)) throw Error(Errc::unknown_unit_type, std::string(unit_type_name(type)));
  if (placement_check_ && !placement_check_(type, pouch)) {
    throw Error(Errc::pinning_violation,
                std::string(unit_type_name(type)) + " is not pinned to pouch " + std::to_string(pouch));
  }
  auto unit = factories_.create(type, params);
  UnitAddress addr{type, next_instance_++, pouch};
  unit->address_ = addr;
  unit->mw_ = this;
  Unit* raw = unit.get();
  units_.emplace(addr.instance, std::move(unit));
  ++instances_[pouch].unit_count_;
  ++instances_[pouch].type_counts_[static_cast<std::size_t>(type)];
  ++counters_.spawned[static_cast<std::size_t>(type)];
  kernel_.execute_work(pouch, spawn_cost_);

  if (auto key = service_key(type)) {
    bus_.publish(ids::topics::kResolvingUpdates, sim::Endpoint::at(pouch),
                 ids::ResolvingUpdate{ids::ResolvingUpdate::Op::Add, *key, addr, {}});
  }
  raw->on_start();
  return addr;
}

void Middleware::terminate_unit(const UnitAddress& addr) {
  auto it = units_.find(addr.instance);
  if (it == units_.end()) return;
  auto& unit = *it->second;
  auto& inst = instances_.at(unit.address_.pouch);
  counters_.dead_letters += unit.pending_;
  inst.dead_letters_ += unit.pending_;
  --inst.unit_count_;
  --inst.type_counts_[static_cast<std::size_t>(addr.type)];
  ++counters_.terminated[static_cast<std::size_t>(addr.type)];
  if (auto key = service_key(addr.type); key && kernel_.pouch_alive(addr.pouch)) {
    bus_.publish(ids::topics::kResolvingUpdates, sim::Endpoint::at(addr.pouch),
                 ids::ResolvingUpdate{ids::ResolvingUpdate::Op::Remove, *key, unit.address_, {}});
  }
  units_.erase(it);
}

void Middleware::send(const UnitAddress& from, const UnitAddress& to, PayloadPtr payload) {
  ++counters_.sent;
  Envelope env{from, to, std::move(payload), kernel_.now()};
  auto src = from.valid() ? sim::Endpoint::at(from.pouch) : sim::Endpoint::system();
  if (!kernel_.has_pouch(to.pouch)) {
    ++counters_.dead_letters;
    return;
  }
  kernel_.schedule(kernel_.now() + kernel_.delay(src, sim::Endpoint::at(to.pouch)),
                   [this, env = std::move(env)] { deliver(env); });
}

void Middleware::send_external(sim::Endpoint from, const UnitAddress& to, PayloadPtr payload) {
  ++counters_.sent;
  Envelope env{UnitAddress{}, to, std::move(payload), kernel_.now()};
  if (!kernel_.has_pouch(to.pouch)) {
    ++counters_.dead_letters;
    return;
  }
  kernel_.schedule(kernel_.now() + kernel_.delay(from, sim::Endpoint::at(to.pouch)),
                   [this, env = std::move(env)] { deliver(env); });
}

void Middleware::deliver(const Envelope& env) {
  auto it = units_.find(env.to.instance);
  if (it == units_.end() || !kernel_.pouch_alive(env.to.pouch)) {
    ++counters_.dead_letters;
    if (auto inst = instances_.find(env.to.pouch); inst != instances_.end()) ++inst->second.dead_letters_;
    return;
  }
  Unit& unit = *it->second;
  ++unit.pending_;
  auto cost = unit.cost_of(env);
  kernel_.execute_work(env.to.pouch, cost, [this, env] {
    auto it2 = units_.find(env.to.instance);
    if (it2 == units_.end()) return;  // terminated while queued: already a dead letter
    --it2->second->pending_;
    ++counters_.handled;
    it2->second->handle(env);
  });
}

UnitAddress Middleware::resolve(PouchId asking_pouch, const std::string& key) {
  return instance(asking_pouch).table_.resolve(key);
}

bool Middleware::is_alive(const UnitAddress& addr) const {
  return addr.valid() && units_.count(addr.instance) != 0 && kernel_.pouch_alive(addr.pouch);
}

Unit* Middleware::find(InstanceId id) {
  auto it = units_.find(id);
  return it == units_.end() ? nullptr : it->second.get();
}

std::vector<UnitAddress> Middleware::live_units(std::optional<PouchId> pouch) const {
  std::vector<UnitAddress> out;
  for (const auto& [id, u] : units_) {
    if (!pouch || u->address_.pouch == *pouch) out.push_back(u->address_);
  }
  std::sort(out.begin(), out.end(), [](const UnitAddress& a, const UnitAddress& b) { return a.instance < b.instance; });
  return out;
}

void Middleware::kill_pouch(PouchId pouch) {
  kernel_.kill_pouch(pouch);
  for (auto it = units_.begin(); it != units_.end();) {
    if (it->second->address_.pouch != pouch) {
      ++it;
      continue;
    }
    auto& u = *it->second;
    counters_.dead_letters += u.pending_;
    ++counters_.lost[static_cast<std::size_t>(u.address_.type)];
    it = units_.erase(it);
  }
  if (auto inst = instances_.find(pouch); inst != instances_.end()) {
    inst->second.unit_count_ = 0;
    inst->second.type_counts_ = {};
    for (auto id : inst->second.subscriptions_) bus_.unsubscribe(id);
  }
}

void Middleware::publish_resolve_snapshot() {
  ids::ResolvingUpdate snap;
  snap.op = ids::ResolvingUpdate::Op::Snapshot;
  for (const auto& addr : live_units()) {
    if (auto key = service_key(addr.type)) snap.table.emplace_back(*key, addr);
  }
  bus_.publish(ids::topics::kResolvingUpdates, sim::Endpoint::system(), std::move(snap));
}

bool Middleware::log_enabled(PouchId pouch, ids::Severity severity) const {
  auto it = instances_.find(pouch);
  std::string level = it == instances_.end() ? "info" : it->second.config_value("log-level", "info");
  ids::Severity threshold = ids::Severity::Info;
  if (level == "debug") threshold = ids::Severity::Debug;
  else if (level == "warn") threshold = ids::Severity::Warn;
  else if (level == "error") threshold = ids::Severity::Error;
  return severity >= threshold;
}

void Middleware::log(const UnitAddress& from, ids::Severity severity, const std::string& call_id, std::string text) {
  if (!log_enabled(from.pouch, severity)) return;
  ids::LogEntry e{kernel_.now(), from.pouch, from.type, from.instance, severity, call_id, std::move(text), {}};
  bus_.publish(ids::topics::kLogEntries, sim::Endpoint::at(from.pouch), std::move(e));
}

std::uint64_t Middleware::live_per_call_units() const {
  std::uint64_t n = 0;
  for (const auto& [id, u] : units_) n += is_per_call(u->address_.type) ? 1 : 0;
  return n;
}

void Middleware::start_monitoring(PouchId pouch) {
  auto interval = instances_.at(pouch).interval_;
  kernel_.schedule_after(interval, [this, pouch] { publish_stats(pouch); });
}

void Middleware::publish_stats(PouchId pouch) {
  if (!kernel_.pouch_alive(pouch)) return;
  auto& inst = instances_.at(pouch);
  auto window = std::min(inst.interval_, kernel_.now());
  ids::UtilizationSample s;
  s.pouch = pouch;
  s.at = kernel_.now();
  s.utilization = window.count() > 0 ? kernel_.cpu_utilization(pouch, window) : 0.0;
  s.unit_count = inst.unit_count_;
  s.dead_letters = inst.dead_letters_;
  bus_.publish(ids::topics::kResourceUtilization, sim::Endpoint::at(pouch), s);
  kernel_.schedule_after(inst.interval_, [this, pouch] { publish_stats(pouch); });
}

}  // namespace unity::cmw
