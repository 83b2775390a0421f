#include "common/error.hpp"

namespace unity {

namespace {
std::string decorate(Errc code, const std::string& what, std::optional<std::size_t> line) {
  std::string s = errc_name(code);
  if (line) s += " (line " + std::to_string(*line) + ")";
  if (!what.empty()) s += ": " + what;
  return s;
}
}  // namespace

Error::Error(Errc code, const std::string& what, std::optional<std::size_t> line)
    : std::runtime_error(decorate(code, what, line)), code_(code), line_(line) {}

const char* errc_name(Errc code) noexcept {
  switch (code) {
    case Errc::ok: return "Ok";
    case Errc::malformed_start_line: return "MalformedStartLine";
    case Errc::missing_mandatory_header: return "MissingMandatoryHeader";
    case Errc::bad_content_length: return "BadContentLength";
    case Errc::bad_cseq_method: return "BadCSeqMethod";
    case Errc::truncated_message: return "TruncatedMessage";
    case Errc::invariant_violation: return "InvariantViolation";
    case Errc::missing_media_line: return "MissingMediaLine";
    case Errc::unknown_codec: return "UnknownCodec";
    case Errc::not_a_request: return "NotARequest";
    case Errc::no_common_codec: return "NoCommonCodec";
    case Errc::scheduling_in_past: return "SchedulingInPast";
    case Errc::pouch_dead: return "PouchDead";
    case Errc::unknown_endpoint: return "UnknownEndpoint";
    case Errc::window_too_large: return "WindowTooLarge";
    case Errc::unknown_unit_type: return "UnknownUnitType";
    case Errc::pinning_violation: return "PinningViolation";
    case Errc::service_unknown: return "ServiceUnknown";
    case Errc::no_live_instance: return "NoLiveInstance";
    case Errc::unknown_unit: return "UnknownUnit";
    case Errc::duplicate_cmw: return "DuplicateCmw";
    case Errc::unknown_topic: return "UnknownTopic";
    case Errc::no_eligible_pouch: return "NoEligiblePouch";
    case Errc::unknown_pouch: return "UnknownPouch";
    case Errc::syntax_error: return "SyntaxError";
    case Errc::uncovered_unit_type: return "UncoveredUnitType";
    case Errc::pool_bounds_error: return "PoolBoundsError";
    case Errc::unknown_config_key: return "UnknownConfigKey";
    case Errc::profile_not_found: return "ProfileNotFound";
    case Errc::negative_rate: return "NegativeRate";
    case Errc::empty_window: return "EmptyWindow";
    case Errc::io_error: return "IoError";
    case Errc::unknown_reference: return "UnknownReference";
  }
  return "Unknown";
}

}  // namespace unity
