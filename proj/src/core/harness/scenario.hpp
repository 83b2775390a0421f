#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace unity::harness {

enum class Arrival { Deterministic, Exponential };

struct ScenarioConfig {
  double call_rate = 30.0;         // calls per minute
  double call_duration = 200.0;    // seconds
  int subscribers = 200;
  double reregistration_rate = 20.0;  // per minute
  double warmup = 60.0;            // seconds
  double window = 600.0;           // seconds
  Arrival arrival = Arrival::Deterministic;
  std::optional<std::uint64_t> seed;
  double ring_delay = 0.0;         // callee answers uniformly within [0, ring_delay] s
  double abandon_fraction = 0.0;   // share of calls hung up while ringing
};

// Flat `key = value` text, `#` comments. Throws Errc::syntax_error or
// Errc::negative_rate.
ScenarioConfig parse_scenario(std::string_view text);
ScenarioConfig load_scenario(const std::string& path);
std::string format_scenario(const ScenarioConfig& s);

}  // namespace unity::harness
