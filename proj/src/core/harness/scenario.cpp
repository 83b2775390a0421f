#include "harness/scenario.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "common/error.hpp"
#include "common/text.hpp"

namespace unity::harness {

namespace {

double number(std::string_view key, std::string_view v, std::size_t line) {
  std::string s(v);
  char* end = nullptr;
  double d = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size() || !std::isfinite(d)) {
    throw Error(Errc::syntax_error, std::string(key) + ": expected a number, got '" + s + "'", line);
  }
  if (d < 0) throw Error(Errc::negative_rate, std::string(key) + " must be >= 0", line);
  return d;
}

}  // namespace

ScenarioConfig parse_scenario(std::string_view content) {
  ScenarioConfig s;
  std::size_t lineno = 0;
  for (auto line : text::split_lines(content)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = text::trim(line);
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string_view::npos) throw Error(Errc::syntax_error, "expected key = value", lineno);
    auto key = text::trim(line.substr(0, eq));
    auto value = text::trim(line.substr(eq + 1));
    if (key == "call_rate") {
      s.call_rate = number(key, value, lineno);
    } else if (key == "call_duration") {
      s.call_duration = number(key, value, lineno);
    } else if (key == "subscribers") {
      auto n = number(key, value, lineno);
      if (n != std::floor(n) || n < 2) throw Error(Errc::syntax_error, "subscribers must be an integer >= 2", lineno);
      s.subscribers = static_cast<int>(n);
    } else if (key == "reregistration_rate") {
      s.reregistration_rate = number(key, value, lineno);
    } else if (key == "warmup") {
      s.warmup = number(key, value, lineno);
    } else if (key == "window") {
      s.window = number(key, value, lineno);
    } else if (key == "ring_delay") {
      s.ring_delay = number(key, value, lineno);
    } else if (key == "abandon_fraction") {
      s.abandon_fraction = number(key, value, lineno);
      if (s.abandon_fraction > 1) throw Error(Errc::syntax_error, "abandon_fraction must be <= 1", lineno);
    } else if (key == "arrival") {
      if (value == "deterministic") s.arrival = Arrival::Deterministic;
      else if (value == "exponential") s.arrival = Arrival::Exponential;
      else throw Error(Errc::syntax_error, "arrival must be deterministic or exponential", lineno);
    } else if (key == "seed") {
      auto v = text::parse_int<std::uint64_t>(value);
      if (!v) throw Error(Errc::syntax_error, "seed must be an unsigned integer", lineno);
      s.seed = *v;
    } else {
      throw Error(Errc::syntax_error, "unknown scenario key '" + std::string(key) + "'", lineno);
    }
  }
  return s;
}

ScenarioConfig load_scenario(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::io_error, "cannot read " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_scenario(ss.str());
}

std::string format_scenario(const ScenarioConfig& s) {
  std::ostringstream out;
  out << "call_rate = " << s.call_rate << "\n"
      << "call_duration = " << s.call_duration << "\n"
      << "subscribers = " << s.subscribers << "\n"
      << "reregistration_rate = " << s.reregistration_rate << "\n"
      << "warmup = " << s.warmup << "\n"
      << "window = " << s.window << "\n"
      << "arrival = " << (s.arrival == Arrival::Deterministic ? "deterministic" : "exponential") << "\n";
  if (s.ring_delay > 0) out << "ring_delay = " << s.ring_delay << "\n";
  if (s.abandon_fraction > 0) out << "abandon_fraction = " << s.abandon_fraction << "\n";
  if (s.seed) out << "seed = " << *s.seed << "\n";
  return out.str();
}

}  // namespace unity::harness
