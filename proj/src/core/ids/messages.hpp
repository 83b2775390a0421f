#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "common/address.hpp"
#include "sim/time.hpp"

namespace unity::ids {

namespace topics {
inline constexpr const char* kResourceUtilization = "resource-utilization";
inline constexpr const char* kResolvingUpdates = "resolving-updates";
inline constexpr const char* kSystemStatus = "system-status";
inline constexpr const char* kGlobalConfig = "global-config";
inline constexpr const char* kLogEntries = "log-entries";
}  // namespace topics

struct UtilizationSample {
  PouchId pouch = 0;
  sim::Micros at{0};
  double utilization = 0.0;
  std::size_t unit_count = 0;
  std::uint64_t dead_letters = 0;
};

struct ResolvingUpdate {
  enum class Op { Add, Remove, Snapshot };
  Op op = Op::Add;
  std::string service_key;
  UnitAddress address;
  // Full table, for Op::Snapshot only.
  std::vector<std::pair<std::string, UnitAddress>> table;
};

struct SystemStatus {
  enum class Kind { PouchUp, PouchDown, PouchRemoved };
  Kind kind = Kind::PouchUp;
  PouchId pouch = 0;
};

struct ConfigUpdate {
  std::map<std::string, std::string> values;
};

enum class Severity { Debug, Info, Warn, Error };
const char* severity_name(Severity s) noexcept;

struct LogEntry {
  sim::Micros timestamp{0};
  PouchId pouch = 0;
  UnitType unit_type = UnitType::SIPh;
  InstanceId instance = 0;
  Severity severity = Severity::Info;
  std::string call_id;
  std::string text;
  std::string source;  // non-unit emitters such as the orchestrator; replaces type#instance
};

using Message = std::variant<UtilizationSample, ResolvingUpdate, SystemStatus, ConfigUpdate, LogEntry>;

}  // namespace unity::ids
