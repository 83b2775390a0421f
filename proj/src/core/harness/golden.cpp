#include "harness/golden.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

#include "common/error.hpp"

namespace unity::harness {

// Defined in the generated golden_data.cpp.
struct GoldenFile {
  const char* name;
  const char* text;
};
extern const GoldenFile kGoldenDescriptors[];
extern const std::size_t kGoldenDescriptorCount;
extern const GoldenFile kGoldenScenarios[];
extern const std::size_t kGoldenScenarioCount;

namespace {

std::optional<std::string_view> find(const GoldenFile* files, std::size_t n, std::string_view name) {
  for (std::size_t i = 0; i < n; ++i) {
    if (name == files[i].name) return std::string_view(files[i].text);
  }
  return std::nullopt;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::io_error, "cannot read " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

std::optional<std::string_view> golden_descriptor_text(std::string_view name) {
  return find(kGoldenDescriptors, kGoldenDescriptorCount, name);
}

std::vector<std::string> golden_descriptor_names() {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < kGoldenDescriptorCount; ++i) out.emplace_back(kGoldenDescriptors[i].name);
  return out;
}

std::optional<std::string_view> golden_scenario_text(std::string_view name) {
  return find(kGoldenScenarios, kGoldenScenarioCount, name);
}

std::string descriptor_text(const std::string& ref) {
  if (auto g = golden_descriptor_text(ref)) return std::string(*g);
  if (!std::filesystem::exists(ref)) throw Error(Errc::unknown_reference, "no golden descriptor or file named '" + ref + "'");
  return read_file(ref);
}

orch::Descriptor resolve_descriptor(const std::string& ref) { return orch::parse_descriptor(descriptor_text(ref)); }

ScenarioConfig resolve_scenario(const std::string& ref) {
  if (auto g = golden_scenario_text(ref)) return parse_scenario(*g);
  if (!std::filesystem::exists(ref)) throw Error(Errc::unknown_reference, "no golden scenario or file named '" + ref + "'");
  return load_scenario(ref);
}

}  // namespace unity::harness
