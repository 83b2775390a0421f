#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>

namespace unity {

// Every failure the core can report. The numeric values are part of the
// C API (unity_status) and must not be reordered.
enum class Errc : int {
  ok = 0,
  // sip-codec
  malformed_start_line = 100,
  missing_mandatory_header,
  bad_content_length,
  bad_cseq_method,
  truncated_message,
  invariant_violation,
  missing_media_line,
  unknown_codec,
  not_a_request,
  no_common_codec,
  // sim-kernel
  scheduling_in_past = 200,
  pouch_dead,
  unknown_endpoint,
  window_too_large,
  // cmw / ids
  unknown_unit_type = 300,
  pinning_violation,
  service_unknown,
  no_live_instance,
  unknown_unit,
  duplicate_cmw,
  unknown_topic,
  // nss
  no_eligible_pouch = 400,
  unknown_pouch,
  // orchestration
  syntax_error = 500,
  uncovered_unit_type,
  pool_bounds_error,
  unknown_config_key,
  // ims
  profile_not_found = 600,
  // harness
  negative_rate = 700,
  empty_window,
  io_error,
  unknown_reference,
};

const char* errc_name(Errc code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what, std::optional<std::size_t> line = std::nullopt);

  Errc code() const noexcept { return code_; }
  // 1-based line of the offending input, when the error came from a parser.
  std::optional<std::size_t> line() const noexcept { return line_; }

 private:
  Errc code_;
  std::optional<std::size_t> line_;
};

}  // namespace unity
