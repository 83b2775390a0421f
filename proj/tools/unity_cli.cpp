#include <cstdio>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "unity/unity.h"

namespace {

// 0 success, 1 bad configuration or arguments, 2 failure while running or
// writing results.
constexpr int kOk = 0;
constexpr int kConfigError = 1;
constexpr int kRuntimeError = 2;

void report(unity_status st, const char* context) {
  std::fprintf(stderr, "unity: %s: [%s] %s\n", context, unity_status_name(st), unity_last_error());
}

template <typename T, void (*Free)(T*)>
struct Handle {
  T* p = nullptr;
  Handle() = default;
  Handle(const Handle&) = delete;
  Handle& operator=(const Handle&) = delete;
  Handle(Handle&& o) noexcept : p(o.p) { o.p = nullptr; }
  ~Handle() { Free(p); }
};
using Descriptor = Handle<unity_descriptor, unity_descriptor_free>;
using Scenario = Handle<unity_scenario, unity_scenario_free>;
using Run = Handle<unity_run, unity_run_free>;
using Matrix = Handle<unity_matrix, unity_matrix_free>;

std::string take(char* s) {
  std::string r = s ? s : "";
  unity_string_free(s);
  return r;
}

struct Common {
  std::string scenario = "paper";
  std::uint64_t seed = 1;
  std::string out;
  std::optional<double> speed;
  std::optional<double> rate;
  std::optional<double> window;
  bool no_media = false;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--scenario", c.scenario, "scenario file or 'paper'")->capture_default_str();
  cmd->add_option("--seed", c.seed, "random seed")->capture_default_str();
  cmd->add_option("--out", c.out, "output directory")->required();
  cmd->add_option("--speed", c.speed, "override the speed factor of every pool")->check(CLI::PositiveNumber);
  cmd->add_option("--rate", c.rate, "override call_rate (calls per minute)");
  cmd->add_option("--window", c.window, "override the measurement window (s)");
  cmd->add_flag("--no-media", c.no_media, "skip per-frame rows in media.csv");
}

bool load_scenario(const Common& c, Scenario& s) {
  if (auto st = unity_scenario_load(c.scenario.c_str(), &s.p); st != UNITY_OK) {
    report(st, ("scenario " + c.scenario).c_str());
    return false;
  }
  auto set = [&](const char* key, std::optional<double> v) {
    if (!v) return true;
    std::ostringstream os;
    os << *v;
    if (auto st = unity_scenario_set(s.p, key, os.str().c_str()); st != UNITY_OK) {
      report(st, key);
      return false;
    }
    return true;
  };
  return set("call_rate", c.rate) && set("window", c.window);
}

bool load_descriptor(const std::string& ref, std::optional<double> speed, Descriptor& d) {
  if (auto st = unity_descriptor_load(ref.c_str(), &d.p); st != UNITY_OK) {
    report(st, ("descriptor " + ref).c_str());
    return false;
  }
  if (speed) {
    if (auto st = unity_descriptor_set_speed(d.p, *speed); st != UNITY_OK) {
      report(st, "speed");
      return false;
    }
  }
  return true;
}

void print_summary(const char* name, const unity_run* r) {
  char* s = nullptr;
  if (unity_run_artifact(r, "summary", &s) != UNITY_OK) return;
  auto j = nlohmann::json::parse(take(s), nullptr, false);
  if (j.is_discarded()) return;
  auto num = [&](const char* a, const char* b = nullptr) -> double {
    const auto& x = b ? j.value(a, nlohmann::json::object()).value(b, nlohmann::json()) : j.value(a, nlohmann::json());
    return x.is_number() ? x.get<double>() : 0.0;
  };
  std::printf("%-6s established %4.0f/%-4.0f latency %8.3f ms  jitter sd %7.4f ms  cpu %.4f  calls %.2f\n", name,
              num("calls", "established"), num("calls", "attempted"), num("setup_latency", "mean_ms"),
              num("jitter", "stddev_ms"), num("cpu", "mean"), num("cpu", "concurrent_calls_mean"));
}

std::vector<std::string> split(const std::string& s) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream is(s);
  while (std::getline(is, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"unity: IMS microservice deployment testbed"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(unity_version()));

  Common run_opts;
  std::string run_descriptor;
  std::optional<double> kill_at;
  std::optional<unsigned> kill_pouch;
  auto* run = app.add_subcommand("run", "run one deployment against a scenario");
  run->add_option("--descriptor", run_descriptor, "descriptor file or NO1..NO5, DIST")->required();
  add_common(run, run_opts);
  run->add_option("--at", kill_at, "kill a pouch at this virtual time (ms)");
  run->add_option("--pouch", kill_pouch, "pouch ordinal to kill")->check(CLI::PositiveNumber);
  auto* kill = run->add_subcommand("kill-pouch", "kill one pouch mid-run");
  kill->add_option("--at", kill_at, "virtual time (ms)")->required();
  kill->add_option("--pouch", kill_pouch, "pouch ordinal")->required()->check(CLI::PositiveNumber);

  Common matrix_opts;
  std::string configs = "NO1,NO2,NO3,NO4,NO5,DIST";
  unsigned threads = 0;
  auto* matrix = app.add_subcommand("matrix", "run several deployments with one scenario and seed");
  matrix->add_option("--configs", configs, "comma-separated descriptor references")->capture_default_str();
  matrix->add_option("--threads", threads, "worker threads, 0 = all cores");
  add_common(matrix, matrix_opts);

  std::string validate_descriptor;
  auto* validate = app.add_subcommand("validate", "check a descriptor and print its pin map");
  validate->add_option("--descriptor", validate_descriptor, "descriptor file or NO1..NO5, DIST")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kConfigError;
  }

  if (*validate) {
    Descriptor d;
    if (!load_descriptor(validate_descriptor, std::nullopt, d)) return kConfigError;
    char* pins = nullptr;
    unity_descriptor_pin_map(d.p, &pins);
    auto text = take(pins);
    std::printf("ok %s %s\n", unity_descriptor_is_pinned(d.p) ? "pinned" : "distributed", text.c_str());
    return kOk;
  }

  if (*run) {
    if (kill_at.has_value() != kill_pouch.has_value()) {
      std::fprintf(stderr, "unity: --at and --pouch go together\n");
      return kConfigError;
    }
    Descriptor d;
    Scenario s;
    if (!load_descriptor(run_descriptor, run_opts.speed, d) || !load_scenario(run_opts, s)) return kConfigError;
    unity_run_options o;
    unity_run_options_init(&o);
    o.keep_media = run_opts.no_media ? 0 : 1;
    if (kill_pouch) {
      o.kill_at_ms = *kill_at;
      o.kill_pouch = *kill_pouch;
    }
    Run r;
    if (auto st = unity_run_experiment(run_descriptor.c_str(), d.p, s.p, run_opts.seed, &o, &r.p); st != UNITY_OK) {
      report(st, "run");
      return kRuntimeError;
    }
    if (auto st = unity_run_write(r.p, run_opts.out.c_str()); st != UNITY_OK) {
      report(st, "write");
      return kRuntimeError;
    }
    print_summary(run_descriptor.c_str(), r.p);
    return kOk;
  }

  // matrix
  auto refs = split(configs);
  if (refs.empty()) {
    std::fprintf(stderr, "unity: --configs is empty\n");
    return kConfigError;
  }
  std::vector<Descriptor> descs(refs.size());
  for (std::size_t i = 0; i < refs.size(); ++i) {
    if (!load_descriptor(refs[i], matrix_opts.speed, descs[i])) return kConfigError;
  }
  Scenario s;
  if (!load_scenario(matrix_opts, s)) return kConfigError;
  std::vector<const char*> names;
  std::vector<const unity_descriptor*> ptrs;
  for (std::size_t i = 0; i < refs.size(); ++i) {
    names.push_back(refs[i].c_str());
    ptrs.push_back(descs[i].p);
  }
  unity_run_options o;
  unity_run_options_init(&o);
  o.keep_media = matrix_opts.no_media ? 0 : 1;
  o.threads = threads;
  Matrix m;
  if (auto st = unity_run_matrix(names.data(), ptrs.data(), refs.size(), s.p, matrix_opts.seed, &o, &m.p);
      st != UNITY_OK) {
    report(st, "matrix");
    return kRuntimeError;
  }
  if (auto st = unity_matrix_write(m.p, matrix_opts.out.c_str()); st != UNITY_OK) {
    report(st, "write");
    return kRuntimeError;
  }
  for (std::size_t i = 0; i < unity_matrix_size(m.p); ++i) print_summary(names[i], unity_matrix_run(m.p, i));
  char* ranking = nullptr;
  if (unity_matrix_ranking(m.p, &ranking) == UNITY_OK) std::printf("\n%s", take(ranking).c_str());
  return kOk;
}
