#include "orchestration/deployment.hpp"

#include <algorithm>
#include <cstdio>
#include <numeric>

#include "common/error.hpp"
#include "sip/sdp.hpp"

namespace unity::orch {

ScaleDecision elasticity_tick(DeploymentMode mode, const Elasticity& policy, const std::vector<double>& utilizations,
                              const std::vector<PoolState>& pools, sim::Micros now,
                              std::optional<sim::Micros> last_action) {
  ScaleDecision d;
  d.at = now;
  if (utilizations.empty()) return d;
  d.mean_utilization = std::accumulate(utilizations.begin(), utilizations.end(), 0.0) /
                       static_cast<double>(utilizations.size());
  if (mode == DeploymentMode::Pinned) return d;
  if (last_action && now - *last_action < policy.cooldown) return d;

  if (d.mean_utilization > policy.cpu_high) {
    const PoolState* best = nullptr;
    for (const auto& p : pools) {
      int headroom = p.max - p.live;
      if (headroom > 0 && (!best || headroom > best->max - best->live)) best = &p;
    }
    if (best) {
      d.action = ScaleDecision::Action::AddPouch;
      d.pool = best->id;
    }
  } else if (d.mean_utilization < policy.cpu_low) {
    for (const auto& p : pools) {
      if (p.live > p.initial && !p.empty_pouches.empty()) {
        d.action = ScaleDecision::Action::RemovePouch;
        d.pool = p.id;
        d.pouch = *std::max_element(p.empty_pouches.begin(), p.empty_pouches.end());
        break;
      }
    }
  }
  return d;
}

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys{"supported-codecs", "log-level", "conference-digits",
                                                 "profile-timeout-ms", "profile-attempts"};
  return keys;
}

std::map<std::string, std::string> default_unit_config() {
  return {{"supported-codecs", "PCMU,PCMA,telephone-event"}, {"log-level", "info"}, {"conference-digits", "*3"},
          {"profile-timeout-ms", "1000"}, {"profile-attempts", "4"}};
}

Deployment::Deployment(Descriptor descriptor, std::uint64_t seed)
    : descriptor_(std::move(descriptor)),
      kernel_(seed, descriptor_.network),
      bus_(kernel_),
      mw_(kernel_, bus_, factories_),
      config_(default_unit_config()) {
  mw_.set_spawn_cost(descriptor_.costs.spawn);
  logs_.attach(bus_);

  nss::PlacementPolicy policy;
  policy.overload_threshold = descriptor_.overload_threshold;
  if (descriptor_.mode == DeploymentMode::Pinned) {
    policy.mode = nss::PlacementMode::Pinned;
    for (const auto& [type, ordinals] : descriptor_.pinned_ordinals()) {
      for (int o : ordinals) pinned_[type].push_back(static_cast<PouchId>(o));
    }
    policy.pinned = pinned_;
    mw_.set_placement_check([this](UnitType type, PouchId pouch) {
      auto it = pinned_.find(type);
      return it != pinned_.end() && std::find(it->second.begin(), it->second.end(), pouch) != it->second.end();
    });
  }
  selector_ = std::make_unique<nss::NodeSelector>(kernel_, policy, descriptor_.monitoring_interval);
  factories_.add(UnitType::NssAgent, [this](const cmw::InitParams&) { return std::make_unique<nss::NssAgent>(*selector_); });

  for (const auto& pool : descriptor_.pools) {
    for (int i = 0; i < pool.initial; ++i) add_pouch(pool);
  }

  bus_.subscribe(ids::topics::kResourceUtilization, sim::Endpoint::system(), [this](const ids::Message& m) {
    if (auto* s = std::get_if<ids::UtilizationSample>(&m)) reports_[s->pouch] = Report{s->utilization, s->at};
  });
}

Deployment::~Deployment() = default;

PouchId Deployment::add_pouch(const Pool& pool) {
  PouchId id = kernel_.add_pouch(pool.id, pool.speed);
  mw_.attach_pouch(id, descriptor_.monitoring_interval, config_);
  pouch_pool_[id] = pool.id;
  selector_->view().add_pouch(id, kernel_.now());
  reports_[id] = Report{0.0, kernel_.now()};
  return id;
}

void Deployment::start() {
  for (UnitType t : {UnitType::SIPh, UnitType::NssAgent, UnitType::H, UnitType::Diah}) place_base_unit(t);
  auto interval = descriptor_.monitoring_interval;
  kernel_.schedule(kernel_.now() + interval + interval / 2, [this] { mmo_tick(); });
}

void Deployment::place_base_unit(UnitType type) {
  std::optional<PouchId> target;
  if (descriptor_.mode == DeploymentMode::Pinned) {
    for (PouchId p : pinned_[type]) {
      if (kernel_.pouch_alive(p) && !declared_down_[p]) {
        target = p;
        break;
      }
    }
  } else {
    std::map<PouchId, int> load;
    for (const auto& [id, pool] : pouch_pool_) {
      if (kernel_.pouch_alive(id) && !declared_down_[id]) load[id] = 0;
    }
    for (const auto& [t, addr] : base_) {
      if (t != type && load.count(addr.pouch) && mw_.is_alive(addr)) ++load[addr.pouch];
    }
    for (const auto& [id, n] : load) {
      if (!target || n < load[*target]) target = id;
    }
  }
  if (!target) {
    throw Error(Errc::no_eligible_pouch, "no live pouch for base unit " + std::string(unit_type_name(type)));
  }
  base_[type] = mw_.spawn_unit(*target, type);
}

std::vector<PoolState> Deployment::pool_states() const {
  std::vector<PoolState> out;
  for (const auto& pool : descriptor_.pools) {
    PoolState s{pool.id, 0, pool.initial, pool.max, {}};
    for (const auto& [id, name] : pouch_pool_) {
      if (name != pool.id || !kernel_.pouch_alive(id)) continue;
      if (auto it = declared_down_.find(id); it != declared_down_.end() && it->second) continue;
      ++s.live;
      if (mw_.live_units(id).empty()) s.empty_pouches.push_back(id);
    }
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<PouchId> Deployment::pouches_of_pool(const std::string& pool) const {
  std::vector<PouchId> out;
  for (const auto& [id, name] : pouch_pool_) {
    if (name == pool && kernel_.pouch_alive(id)) out.push_back(id);
  }
  return out;
}

void Deployment::mmo_tick() {
  const auto now = kernel_.now();
  const auto interval = descriptor_.monitoring_interval;

  // Failure detection: a pouch silent for three intervals is declared down.
  for (const auto& [id, report] : reports_) {
    if (declared_down_[id] || now - report.at <= 3 * interval) continue;
    declared_down_[id] = true;
    selector_->view().remove_pouch(id);
    bus_.publish(ids::topics::kSystemStatus, sim::Endpoint::system(),
                 ids::SystemStatus{ids::SystemStatus::Kind::PouchDown, id});
    mmo_log(id, ids::Severity::Warn, "pouch silent for 3 intervals, declared down");
    for (const auto& [type, addr] : std::map<UnitType, UnitAddress>(base_)) {
      if (addr.pouch == id && !mw_.is_alive(addr)) {
        try {
          place_base_unit(type);
          mmo_log(base_[type].pouch, ids::Severity::Info,
                  "respawned " + std::string(unit_type_name(type)) + " lost with pouch " + std::to_string(id));
        } catch (const Error& e) {
          // pinned deployment with no surviving pouch for this type
          mmo_log(id, ids::Severity::Error, e.what());
        }
      }
    }
  }

  std::vector<double> utils;
  for (const auto& [id, report] : reports_) {
    if (!declared_down_[id]) utils.push_back(report.utilization);
  }
  auto decision = elasticity_tick(descriptor_.mode, descriptor_.elasticity, utils, pool_states(), now, last_scale_);
  if (decision.action != ScaleDecision::Action::None) apply(decision);

  kernel_.schedule_after(interval, [this] { mmo_tick(); });
}

void Deployment::apply(const ScaleDecision& d) {
  if (d.action == ScaleDecision::Action::AddPouch) {
    auto pool = std::find_if(descriptor_.pools.begin(), descriptor_.pools.end(),
                             [&](const Pool& p) { return p.id == d.pool; });
    PouchId id = add_pouch(*pool);
    bus_.publish(ids::topics::kSystemStatus, sim::Endpoint::system(),
                 ids::SystemStatus{ids::SystemStatus::Kind::PouchUp, id});
    mw_.publish_resolve_snapshot();
    auto done = d;
    done.pouch = id;
    history_.push_back(done);
    char buf[96];
    std::snprintf(buf, sizeof buf, "scale out: added pouch, mean utilization %.3f", d.mean_utilization);
    mmo_log(id, ids::Severity::Info, buf);
  } else if (d.action == ScaleDecision::Action::RemovePouch) {
    if (!mw_.live_units(d.pouch).empty()) return;
    declared_down_[d.pouch] = true;
    selector_->view().remove_pouch(d.pouch);
    bus_.publish(ids::topics::kSystemStatus, sim::Endpoint::system(),
                 ids::SystemStatus{ids::SystemStatus::Kind::PouchRemoved, d.pouch});
    mw_.kill_pouch(d.pouch);
    history_.push_back(d);
    char buf[96];
    std::snprintf(buf, sizeof buf, "scale in: removed idle pouch, mean utilization %.3f", d.mean_utilization);
    mmo_log(d.pouch, ids::Severity::Info, buf);
  }
  last_scale_ = kernel_.now();
}

void Deployment::push_config(const std::map<std::string, std::string>& values) {
  const auto& keys = config_keys();
  for (const auto& [k, v] : values) {
    if (std::find(keys.begin(), keys.end(), k) == keys.end()) throw Error(Errc::unknown_config_key, k);
    if (k == "supported-codecs") {
      std::string_view rest = v;
      while (!rest.empty()) {
        auto comma = rest.find(',');
        auto name = rest.substr(0, comma);
        if (!sip::codec_from_name(name)) throw Error(Errc::unknown_config_key, "codec '" + std::string(name) + "'");
        if (comma == std::string_view::npos) break;
        rest.remove_prefix(comma + 1);
      }
    } else if (k == "log-level" && v != "debug" && v != "info" && v != "warn" && v != "error") {
      throw Error(Errc::unknown_config_key, "log-level '" + v + "'");
    }
  }
  for (const auto& [k, v] : values) config_[k] = v;
  bus_.publish(ids::topics::kGlobalConfig, sim::Endpoint::system(), ids::ConfigUpdate{values});
}

void Deployment::kill_pouch(PouchId pouch) {
  mmo_log(pouch, ids::Severity::Warn, "pouch killed");
  mw_.kill_pouch(pouch);
}

void Deployment::mmo_log(PouchId pouch, ids::Severity severity, std::string text) {
  ids::LogEntry e;
  e.timestamp = kernel_.now();
  e.pouch = pouch;
  e.severity = severity;
  e.text = std::move(text);
  e.source = "MMO";
  bus_.publish(ids::topics::kLogEntries, sim::Endpoint::system(), std::move(e));
}

}  // namespace unity::orch
