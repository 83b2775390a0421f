#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "harness/scenario.hpp"
#include "orchestration/descriptor.hpp"

namespace unity::harness {

// Built-in descriptor files: NO1..NO5 and DIST.
std::optional<std::string_view> golden_descriptor_text(std::string_view name);
std::vector<std::string> golden_descriptor_names();
// Built-in scenarios: "paper".
std::optional<std::string_view> golden_scenario_text(std::string_view name);

// A golden name or a file path. Throws Errc::unknown_reference when the
// reference is neither, Errc::io_error when the file can't be read.
orch::Descriptor resolve_descriptor(const std::string& ref);
std::string descriptor_text(const std::string& ref);
ScenarioConfig resolve_scenario(const std::string& ref);

}  // namespace unity::harness
