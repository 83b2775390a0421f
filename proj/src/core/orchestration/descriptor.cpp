#include "orchestration/descriptor.hpp"

#include <algorithm>
#include <charconv>
#include <set>

#include "common/error.hpp"
#include "common/text.hpp"

namespace unity::orch {

using text::trim;

namespace {

struct CostField {
  const char* key;
  sim::Micros CostModel::*field;
};

constexpr CostField kCostFields[] = {
    {"sip_route", &CostModel::sip_route},       {"c_step", &CostModel::c_step},
    {"h_query", &CostModel::h_query},           {"h_cache_hit", &CostModel::h_cache_hit},
    {"diah_hss", &CostModel::diah_hss},         {"a_negotiate", &CostModel::a_negotiate},
    {"t_event", &CostModel::t_event},           {"m_frame_leg", &CostModel::m_frame_leg},
    {"spawn", &CostModel::spawn},               {"bye", &CostModel::bye},
    {"c_audit", &CostModel::c_audit},           {"c_audit_interval", &CostModel::c_audit_interval},
};

double parse_double(std::string_view v, std::size_t lineno) {
  v = trim(v);
  double out = 0;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (v.empty() || ec != std::errc{} || p != v.data() + v.size()) {
    throw Error(Errc::syntax_error, "expected a number, got '" + std::string(v) + "'", lineno);
  }
  return out;
}

int parse_int(std::string_view v, std::size_t lineno) {
  v = trim(v);
  int out = 0;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (v.empty() || ec != std::errc{} || p != v.data() + v.size()) {
    throw Error(Errc::syntax_error, "expected an integer, got '" + std::string(v) + "'", lineno);
  }
  return out;
}

}  // namespace

bool CostModel::set(std::string_view key, double ms) {
  for (const auto& f : kCostFields) {
    if (key == f.key) {
      this->*f.field = sim::from_ms(ms);
      return true;
    }
  }
  return false;
}

std::vector<std::string> CostModel::keys() {
  std::vector<std::string> out;
  for (const auto& f : kCostFields) out.push_back(std::string(f.key) + "_ms");
  return out;
}

int Descriptor::initial_pouch_count() const {
  int n = 0;
  for (const auto& p : pools) n += p.initial;
  return n;
}

std::map<UnitType, std::vector<int>> Descriptor::pinned_ordinals() const {
  std::map<UnitType, std::vector<int>> out;
  for (const auto& g : pin_map) {
    for (UnitType t : g.types) out[t] = g.ordinals;
  }
  return out;
}

Descriptor parse_descriptor(std::string_view text) {
  Descriptor d;
  enum class Section { None, Pool, Deployment, Elasticity, Costs, Network } section = Section::None;
  Pool* pool = nullptr;
  std::set<std::string> pool_keys;
  bool mode_seen = false;
  std::size_t lineno = 0;

  auto finish_pool = [&](std::size_t at) {
    if (!pool) return;
    if (!pool_keys.count("pouches")) throw Error(Errc::syntax_error, "pool '" + pool->id + "' lacks pouches=", at);
    if (!pool_keys.count("max")) pool->max = pool->initial;
    pool = nullptr;
    pool_keys.clear();
  };

  for (auto raw : text::split_lines(text)) {
    ++lineno;
    auto line = raw.substr(0, raw.find('#'));
    line = trim(line);
    if (line.empty()) continue;

    if (line.front() == '[') {
      if (line.back() != ']') throw Error(Errc::syntax_error, "unterminated section header", lineno);
      finish_pool(lineno);
      auto name = trim(line.substr(1, line.size() - 2));
      if (name.substr(0, 5) == "pool " || name.substr(0, 5) == "pool\t") {
        auto id = trim(name.substr(5));
        if (id.empty()) throw Error(Errc::syntax_error, "pool needs an id", lineno);
        for (const auto& p : d.pools) {
          if (p.id == id) throw Error(Errc::syntax_error, "duplicate pool '" + std::string(id) + "'", lineno);
        }
        d.pools.push_back(Pool{std::string(id), 0, 0, 1.0});
        pool = &d.pools.back();
        section = Section::Pool;
      } else if (name == "deployment") {
        section = Section::Deployment;
      } else if (name == "elasticity") {
        section = Section::Elasticity;
      } else if (name == "costs") {
        section = Section::Costs;
      } else if (name == "network") {
        section = Section::Network;
      } else {
        throw Error(Errc::syntax_error, "unknown section [" + std::string(name) + "]", lineno);
      }
      continue;
    }

    if (section == Section::Deployment && line.substr(0, 4) == "pin ") {
      auto arrow = line.find("->");
      if (arrow == std::string_view::npos) throw Error(Errc::syntax_error, "pin line needs '->'", lineno);
      auto list = trim(line.substr(4, arrow - 4));
      int ordinal = parse_int(line.substr(arrow + 2), lineno);
      std::vector<UnitType> types;
      while (!list.empty()) {
        auto comma = list.find(',');
        auto name = trim(list.substr(0, comma));
        auto t = unit_type_from_name(name);
        if (!t) throw Error(Errc::unknown_unit_type, std::string(name), lineno);
        if (std::find(types.begin(), types.end(), *t) != types.end()) {
          throw Error(Errc::syntax_error, "type listed twice in one pin", lineno);
        }
        types.push_back(*t);
        if (comma == std::string_view::npos) break;
        list.remove_prefix(comma + 1);
      }
      if (types.empty()) throw Error(Errc::syntax_error, "empty pin type list", lineno);
      std::sort(types.begin(), types.end());
      auto group = std::find_if(d.pin_map.begin(), d.pin_map.end(), [&](const PinGroup& g) { return g.types == types; });
      if (group == d.pin_map.end()) {
        d.pin_map.push_back(PinGroup{types, {}});
        group = d.pin_map.end() - 1;
      }
      group->ordinals.push_back(ordinal);
      continue;
    }

    auto eq = line.find('=');
    if (eq == std::string_view::npos) throw Error(Errc::syntax_error, "expected key=value", lineno);
    auto key = trim(line.substr(0, eq));
    auto value = trim(line.substr(eq + 1));

    switch (section) {
      case Section::None:
        throw Error(Errc::syntax_error, "key outside any section", lineno);
      case Section::Pool:
        if (key == "pouches") pool->initial = parse_int(value, lineno);
        else if (key == "max") pool->max = parse_int(value, lineno);
        else if (key == "speed") pool->speed = parse_double(value, lineno);
        else throw Error(Errc::syntax_error, "unknown pool key '" + std::string(key) + "'", lineno);
        pool_keys.insert(std::string(key));
        break;
      case Section::Deployment:
        if (key == "mode") {
          if (value == "pinned") d.mode = DeploymentMode::Pinned;
          else if (value == "distributed") d.mode = DeploymentMode::Distributed;
          else throw Error(Errc::syntax_error, "mode must be pinned or distributed", lineno);
          mode_seen = true;
        } else if (key == "overload_threshold") {
          d.overload_threshold = parse_double(value, lineno);
        } else if (key == "monitor_ms") {
          d.monitoring_interval = sim::from_ms(parse_double(value, lineno));
          if (d.monitoring_interval.count() <= 0) throw Error(Errc::syntax_error, "monitor_ms must be > 0", lineno);
        } else {
          throw Error(Errc::syntax_error, "unknown deployment key '" + std::string(key) + "'", lineno);
        }
        break;
      case Section::Elasticity:
        if (key == "cpu_high") d.elasticity.cpu_high = parse_double(value, lineno);
        else if (key == "cpu_low") d.elasticity.cpu_low = parse_double(value, lineno);
        else if (key == "cooldown_ms") d.elasticity.cooldown = sim::from_ms(parse_double(value, lineno));
        else throw Error(Errc::syntax_error, "unknown elasticity key '" + std::string(key) + "'", lineno);
        break;
      case Section::Costs: {
        constexpr std::string_view kSuffix = "_ms";
        if (key.size() <= kSuffix.size() || key.substr(key.size() - kSuffix.size()) != kSuffix) {
          throw Error(Errc::syntax_error, "cost keys end in _ms", lineno);
        }
        double ms = parse_double(value, lineno);
        if (ms < 0) throw Error(Errc::syntax_error, "negative cost", lineno);
        if (!d.costs.set(key.substr(0, key.size() - kSuffix.size()), ms)) {
          throw Error(Errc::syntax_error, "unknown cost '" + std::string(key) + "'", lineno);
        }
        break;
      }
      case Section::Network: {
        double ms = parse_double(value, lineno);
        if (ms < 0) throw Error(Errc::syntax_error, "negative delay", lineno);
        if (key == "intra_ms") d.network.intra = sim::from_ms(ms);
        else if (key == "inter_ms") d.network.inter = sim::from_ms(ms);
        else if (key == "ua_ms") d.network.ua = sim::from_ms(ms);
        else throw Error(Errc::syntax_error, "unknown network key '" + std::string(key) + "'", lineno);
        break;
      }
    }
  }
  finish_pool(lineno);

  if (d.pools.empty()) throw Error(Errc::syntax_error, "descriptor defines no pool");
  for (const auto& p : d.pools) {
    if (p.initial < 0 || p.max < p.initial) {
      throw Error(Errc::pool_bounds_error, "pool '" + p.id + "': need 0 <= pouches <= max");
    }
    if (!(p.speed >= 0.1)) throw Error(Errc::pool_bounds_error, "pool '" + p.id + "': speed must be >= 0.1");
  }
  if (d.initial_pouch_count() < 1) throw Error(Errc::pool_bounds_error, "no initial pouch");
  if (!mode_seen) throw Error(Errc::syntax_error, "[deployment] mode= is required");
  if (d.elasticity.cpu_low > d.elasticity.cpu_high) {
    throw Error(Errc::syntax_error, "cpu_low must not exceed cpu_high");
  }

  if (d.mode == DeploymentMode::Pinned) {
    std::set<UnitType> covered;
    for (const auto& g : d.pin_map) {
      for (UnitType t : g.types) {
        if (!covered.insert(t).second) {
          throw Error(Errc::syntax_error, std::string(unit_type_name(t)) + " appears in two pin groups");
        }
      }
      for (int o : g.ordinals) {
        if (o < 1 || o > d.initial_pouch_count()) {
          throw Error(Errc::pool_bounds_error, "pin ordinal " + std::to_string(o) + " is not a deployed pouch");
        }
      }
    }
    for (UnitType t : kAllUnitTypes) {
      if (!covered.count(t)) throw Error(Errc::uncovered_unit_type, std::string(unit_type_name(t)));
    }
  } else if (!d.pin_map.empty()) {
    throw Error(Errc::syntax_error, "pin lines require mode=pinned");
  }
  return d;
}

std::string format_pin_map(const Descriptor& d) {
  std::string out;
  for (const auto& g : d.pin_map) {
    if (!out.empty()) out += ' ';
    for (std::size_t i = 0; i < g.types.size(); ++i) {
      if (i) out += ',';
      out += unit_type_name(g.types[i]);
    }
    out += "->";
    for (std::size_t i = 0; i < g.ordinals.size(); ++i) {
      if (i) out += ',';
      out += std::to_string(g.ordinals[i]);
    }
  }
  return out;
}

}  // namespace unity::orch
