#include <doctest.h>
#include <sys/wait.h>

#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>

#include "unity/unity.h"

namespace fs = std::filesystem;

namespace {

std::string take(char* s) {
  std::string out = s ? s : "";
  unity_string_free(s);
  return out;
}

const char* kQuick =
    "call_rate = 60\ncall_duration = 5\nsubscribers = 20\nreregistration_rate = 0\nwarmup = 5\nwindow = 10\n";

fs::path scratch(const char* name) {
  auto p = fs::temp_directory_path() / name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

int cli(const std::string& args) {
  std::string cmd = std::string(UNITY_CLI) + " " + args + " >/dev/null 2>&1";
  int st = std::system(cmd.c_str());
  return WIFEXITED(st) ? WEXITSTATUS(st) : -1;
}

}  // namespace

TEST_CASE("status names and versions") {
  CHECK(std::strcmp(unity_status_name(UNITY_OK), "Ok") == 0);
  CHECK(std::strcmp(unity_status_name(UNITY_E_PINNING_VIOLATION), "PinningViolation") == 0);
  CHECK(std::strlen(unity_status_name(12345)) > 0);
  CHECK(std::strlen(unity_version()) > 0);
}

TEST_CASE("null handles are rejected") {
  unity_descriptor* d = nullptr;
  CHECK(unity_descriptor_load(nullptr, &d) == UNITY_E_INVALID_ARGUMENT);
  CHECK(unity_descriptor_load("DIST", nullptr) == UNITY_E_INVALID_ARGUMENT);
  CHECK(unity_run_write(nullptr, "/tmp") == UNITY_E_INVALID_ARGUMENT);
  CHECK(std::strlen(unity_last_error()) > 0);
  unity_descriptor_free(nullptr);
  unity_scenario_free(nullptr);
  unity_run_free(nullptr);
  unity_matrix_free(nullptr);
}

TEST_CASE("descriptors") {
  unity_descriptor* d = nullptr;
  REQUIRE(unity_descriptor_load("NO3", &d) == UNITY_OK);
  CHECK(unity_descriptor_is_pinned(d) == 1);
  char* pins = nullptr;
  REQUIRE(unity_descriptor_pin_map(d, &pins) == UNITY_OK);
  CHECK(take(pins).find("C->3") != std::string::npos);
  CHECK(unity_descriptor_set_speed(d, 0) != UNITY_OK);
  unity_descriptor_free(d);

  REQUIRE(unity_descriptor_load("DIST", &d) == UNITY_OK);
  CHECK(unity_descriptor_is_pinned(d) == 0);
  unity_descriptor_free(d);

  d = nullptr;
  CHECK(unity_descriptor_load("NO9", &d) == UNITY_E_UNKNOWN_REFERENCE);
  CHECK(d == nullptr);
  CHECK(unity_descriptor_parse("[pool cu]\npouches=x\n", &d) == UNITY_E_SYNTAX_ERROR);
  CHECK(unity_last_error_line() == 2);
}

TEST_CASE("scenarios") {
  unity_scenario* s = nullptr;
  REQUIRE(unity_scenario_load("paper", &s) == UNITY_OK);
  CHECK(unity_scenario_set(s, "call_rate", "-3") == UNITY_E_NEGATIVE_RATE);
  CHECK(unity_scenario_set(s, "colour", "red") == UNITY_E_SYNTAX_ERROR);
  CHECK(unity_scenario_set(s, "call_rate", "12") == UNITY_OK);
  unity_scenario_free(s);
  CHECK(unity_scenario_parse("call_rate\n", &s) == UNITY_E_SYNTAX_ERROR);
}

TEST_CASE("a run through the C API") {
  unity_descriptor* d = nullptr;
  unity_scenario* s = nullptr;
  REQUIRE(unity_descriptor_load("DIST", &d) == UNITY_OK);
  REQUIRE(unity_scenario_parse(kQuick, &s) == UNITY_OK);
  unity_run_options o;
  unity_run_options_init(&o);
  unity_run* r = nullptr;
  REQUIRE(unity_run_experiment("DIST", d, s, 9, &o, &r) == UNITY_OK);

  char* calls = nullptr;
  REQUIRE(unity_run_artifact(r, "calls", &calls) == UNITY_OK);
  auto text = take(calls);
  CHECK(text.rfind("call_id,", 0) == 0);
  CHECK(text.find("established") != std::string::npos);
  char* junk = nullptr;
  CHECK(unity_run_artifact(r, "weather", &junk) == UNITY_E_UNKNOWN_REFERENCE);

  auto dir = scratch("unity_capi_run");
  REQUIRE(unity_run_write(r, dir.c_str()) == UNITY_OK);
  for (const char* f : {"calls.csv", "cpu.csv", "media.csv", "summary.json", "unity.log.tsv"}) {
    CHECK(fs::exists(dir / f));
  }
  unity_run_free(r);

  const char* names[] = {"NO1", "DIST"};
  unity_descriptor* no1 = nullptr;
  REQUIRE(unity_descriptor_load("NO1", &no1) == UNITY_OK);
  const unity_descriptor* ds[] = {no1, d};
  unity_matrix* m = nullptr;
  REQUIRE(unity_run_matrix(names, ds, 2, s, 9, &o, &m) == UNITY_OK);
  CHECK(unity_matrix_size(m) == 2);
  CHECK(unity_matrix_run(m, 1) != nullptr);
  CHECK(unity_matrix_run(m, 2) == nullptr);
  char* ranking = nullptr;
  REQUIRE(unity_matrix_ranking(m, &ranking) == UNITY_OK);
  CHECK(take(ranking).find("DIST") != std::string::npos);
  unity_matrix_free(m);

  unity_descriptor_free(no1);
  unity_descriptor_free(d);
  unity_scenario_free(s);
  fs::remove_all(dir);
}

TEST_CASE("CLI exit codes") {
  auto dir = scratch("unity_cli_exit");
  auto scn = dir / "quick.scn";
  std::ofstream(scn) << kQuick;

  CHECK(cli("validate --descriptor NO3") == 0);
  CHECK(cli("validate --descriptor DIST") == 0);
  CHECK(cli("validate --descriptor /nonexistent.desc") == 1);
  CHECK(cli("run --descriptor NO9 --scenario paper --out " + (dir / "x").string()) == 1);
  CHECK(cli("run --descriptor DIST --scenario nope --out " + (dir / "x").string()) == 1);
  CHECK(cli("run --descriptor DIST --scenario paper --at 5") == 1);
  CHECK(cli("bogus") == 1);

  CHECK(cli("run --descriptor DIST --scenario " + scn.string() + " --seed 3 --out " + (dir / "ok").string()) == 0);
  CHECK(fs::exists(dir / "ok" / "summary.json"));
  CHECK(cli("run --descriptor DIST --scenario " + scn.string() + " --out " + (dir / "ok").string() +
            " kill-pouch --at 8000 --pouch 5") == 0);

  // output path runs through a regular file
  CHECK(cli("run --descriptor DIST --scenario " + scn.string() + " --out " + (scn / "out").string()) == 2);
  fs::remove_all(dir);
}
