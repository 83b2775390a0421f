#include "unity/unity.h"

#include <cstdlib>
#include <cstring>
#include <exception>
#include <memory>
#include <new>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "common/error.hpp"
#include "harness/experiment.hpp"
#include "harness/golden.hpp"
#include "harness/report.hpp"
#include "orchestration/descriptor.hpp"
#include "sip/message.hpp"

struct unity_descriptor {
  unity::orch::Descriptor value;
};
struct unity_scenario {
  unity::harness::ScenarioConfig value;
};
// Matrix members borrow from their matrix; standalone runs own their result.
struct unity_run {
  std::unique_ptr<unity::harness::RunResult> owned;
  const unity::harness::RunResult* ptr = nullptr;
  const unity::harness::RunResult& value() const { return *ptr; }
};
struct unity_matrix {
  unity::harness::MatrixReport value;
  std::vector<unity_run> runs;
};

namespace {

thread_local std::string g_error;
thread_local std::size_t g_error_line = 0;

void clear_error() {
  g_error.clear();
  g_error_line = 0;
}

template <typename F>
unity_status guarded(F&& f) {
  clear_error();
  try {
    f();
    return UNITY_OK;
  } catch (const unity::Error& e) {
    g_error = e.what();
    g_error_line = e.line().value_or(0);
    return static_cast<unity_status>(e.code());
  } catch (const std::bad_alloc&) {
    g_error = "out of memory";
    return UNITY_E_INTERNAL;
  } catch (const std::exception& e) {
    g_error = e.what();
    return UNITY_E_INTERNAL;
  }
}

unity_status invalid(const char* what) {
  g_error = what;
  g_error_line = 0;
  return UNITY_E_INVALID_ARGUMENT;
}

char* dup(const std::string& s) {
  char* p = static_cast<char*>(std::malloc(s.size() + 1));
  if (!p) throw std::bad_alloc();
  std::memcpy(p, s.data(), s.size() + 1);
  return p;
}

unity::harness::RunOptions to_options(const unity_run_options* o) {
  unity::harness::RunOptions r;
  if (!o) return r;
  if (o->kill_pouch != 0) {
    r.kill = unity::harness::KillSpec{unity::sim::from_ms(o->kill_at_ms), o->kill_pouch};
  }
  r.keep_media = o->keep_media != 0;
  return r;
}

nlohmann::ordered_json name_addr(const unity::sip::NameAddr& a) {
  nlohmann::ordered_json j;
  j["display"] = a.display;
  j["uri"] = a.uri;
  j["tag"] = a.tag ? nlohmann::ordered_json(*a.tag) : nlohmann::ordered_json(nullptr);
  j["params"] = a.params;
  return j;
}

}  // namespace

extern "C" {

const char* unity_last_error(void) { return g_error.c_str(); }
size_t unity_last_error_line(void) { return g_error_line; }

const char* unity_status_name(unity_status status) {
  if (status == UNITY_E_INVALID_ARGUMENT) return "InvalidArgument";
  if (status == UNITY_E_INTERNAL) return "Internal";
  return unity::errc_name(static_cast<unity::Errc>(status));
}

const char* unity_version(void) { return "1.0.0"; }

void unity_string_free(char* s) { std::free(s); }

unity_status unity_descriptor_load(const char* ref, unity_descriptor** out) {
  if (!ref || !out) return invalid("null argument");
  *out = nullptr;
  return guarded([&] { *out = new unity_descriptor{unity::harness::resolve_descriptor(ref)}; });
}

unity_status unity_descriptor_parse(const char* text, unity_descriptor** out) {
  if (!text || !out) return invalid("null argument");
  *out = nullptr;
  return guarded([&] { *out = new unity_descriptor{unity::orch::parse_descriptor(text)}; });
}

void unity_descriptor_free(unity_descriptor* d) { delete d; }

unity_status unity_descriptor_pin_map(const unity_descriptor* d, char** out) {
  if (!d || !out) return invalid("null argument");
  return guarded([&] { *out = dup(unity::orch::format_pin_map(d->value)); });
}

int unity_descriptor_is_pinned(const unity_descriptor* d) {
  return d && d->value.mode == unity::orch::DeploymentMode::Pinned ? 1 : 0;
}

unity_status unity_descriptor_set_speed(unity_descriptor* d, double speed) {
  if (!d) return invalid("null descriptor");
  if (!(speed > 0)) return invalid("speed must be positive");
  for (auto& p : d->value.pools) p.speed = speed;
  clear_error();
  return UNITY_OK;
}

unity_status unity_scenario_load(const char* ref, unity_scenario** out) {
  if (!ref || !out) return invalid("null argument");
  *out = nullptr;
  return guarded([&] { *out = new unity_scenario{unity::harness::resolve_scenario(ref)}; });
}

unity_status unity_scenario_parse(const char* text, unity_scenario** out) {
  if (!text || !out) return invalid("null argument");
  *out = nullptr;
  return guarded([&] { *out = new unity_scenario{unity::harness::parse_scenario(text)}; });
}

unity_status unity_scenario_set(unity_scenario* s, const char* key, const char* value) {
  if (!s || !key || !value) return invalid("null argument");
  return guarded([&] {
    auto text = unity::harness::format_scenario(s->value) + "\n" + key + " = " + value + "\n";
    s->value = unity::harness::parse_scenario(text);
  });
}

void unity_scenario_free(unity_scenario* s) { delete s; }

void unity_run_options_init(unity_run_options* o) {
  if (!o) return;
  o->kill_at_ms = 0;
  o->kill_pouch = 0;
  o->keep_media = 1;
  o->threads = 0;
}

unity_status unity_run_experiment(const char* name, const unity_descriptor* d, const unity_scenario* s,
                                  uint64_t seed, const unity_run_options* o, unity_run** out) {
  if (!d || !s || !out) return invalid("null argument");
  *out = nullptr;
  return guarded([&] {
    auto r = unity::harness::run_experiment(name ? name : "custom", d->value, s->value, seed, to_options(o));
    auto run = std::make_unique<unity_run>();
    run->owned = std::make_unique<unity::harness::RunResult>(std::move(r));
    run->ptr = run->owned.get();
    *out = run.release();
  });
}

unity_status unity_run_write(const unity_run* r, const char* dir) {
  if (!r || !dir) return invalid("null argument");
  return guarded([&] { unity::harness::emit_report(r->value(), dir); });
}

unity_status unity_run_artifact(const unity_run* r, const char* which, char** out) {
  if (!r || !which || !out) return invalid("null argument");
  return guarded([&] {
    std::string w = which;
    const auto& v = r->value();
    if (w == "calls") *out = dup(unity::harness::calls_csv(v.store));
    else if (w == "cpu") *out = dup(unity::harness::cpu_csv(v.store));
    else if (w == "media") *out = dup(unity::harness::media_csv(v.store));
    else if (w == "summary") *out = dup(unity::harness::summary_json(v));
    else if (w == "log") *out = dup(v.log_tsv);
    else throw unity::Error(unity::Errc::unknown_reference, "artifact " + w);
  });
}

void unity_run_free(unity_run* r) { delete r; }

unity_status unity_run_matrix(const char* const* names, const unity_descriptor* const* descriptors, size_t count,
                              const unity_scenario* s, uint64_t seed, const unity_run_options* o,
                              unity_matrix** out) {
  if (!names || !descriptors || !s || !out || count == 0) return invalid("null or empty argument");
  *out = nullptr;
  return guarded([&] {
    std::vector<unity::harness::NamedDescriptor> configs;
    for (size_t i = 0; i < count; ++i) {
      if (!names[i] || !descriptors[i]) throw unity::Error(unity::Errc::unknown_reference, "null config");
      configs.push_back({names[i], descriptors[i]->value});
    }
    auto m = std::make_unique<unity_matrix>();
    m->value = unity::harness::run_experiment_matrix(configs, s->value, seed, o ? o->threads : 0, to_options(o));
    m->runs.resize(m->value.runs.size());
    for (size_t i = 0; i < m->runs.size(); ++i) m->runs[i].ptr = &m->value.runs[i];
    *out = m.release();
  });
}

unity_status unity_matrix_write(const unity_matrix* m, const char* dir) {
  if (!m || !dir) return invalid("null argument");
  return guarded([&] { unity::harness::emit_matrix_report(m->value, dir); });
}

unity_status unity_matrix_ranking(const unity_matrix* m, char** out) {
  if (!m || !out) return invalid("null argument");
  return guarded([&] { *out = dup(unity::harness::ranking_csv(m->value)); });
}

size_t unity_matrix_size(const unity_matrix* m) { return m ? m->runs.size() : 0; }

const unity_run* unity_matrix_run(const unity_matrix* m, size_t index) {
  if (!m || index >= m->runs.size()) return nullptr;
  return &m->runs[index];
}

void unity_matrix_free(unity_matrix* m) { delete m; }

unity_status unity_sip_normalize(const char* data, size_t len, char** out) {
  if ((!data && len) || !out) return invalid("null argument");
  return guarded([&] {
    auto msg = unity::sip::parse_message(std::string_view(data ? data : "", len));
    *out = dup(unity::sip::serialize_message(msg));
  });
}

unity_status unity_sip_describe(const char* data, size_t len, char** out) {
  if ((!data && len) || !out) return invalid("null argument");
  return guarded([&] {
    auto m = unity::sip::parse_message(std::string_view(data ? data : "", len));
    nlohmann::ordered_json j;
    if (m.is_request()) {
      j["kind"] = "request";
      j["method"] = std::string(unity::sip::method_name(m.method));
      j["request_uri"] = m.request_uri;
    } else {
      j["kind"] = "response";
      j["status"] = m.status_code;
      j["reason"] = m.reason;
    }
    j["via"] = m.via;
    j["from"] = name_addr(m.from);
    j["to"] = name_addr(m.to);
    j["call_id"] = m.call_id;
    j["cseq"] = {{"number", m.cseq.number}, {"method", std::string(unity::sip::method_name(m.cseq.method))}};
    j["contact"] = m.contact ? nlohmann::ordered_json(*m.contact) : nlohmann::ordered_json(nullptr);
    j["content_type"] = m.content_type ? nlohmann::ordered_json(*m.content_type) : nlohmann::ordered_json(nullptr);
    j["content_length"] = m.content_length;
    auto others = nlohmann::ordered_json::array();
    for (const auto& h : m.other_headers) others.push_back({h.name, h.value});
    j["other_headers"] = others;
    j["body"] = m.body;
    *out = dup(j.dump(2) + "\n");
  });
}

}  // extern "C"
