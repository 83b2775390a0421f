#pragma once

#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace unity::sip {

enum class Codec { PCMU, PCMA, G729, TelephoneEvent };

std::string_view codec_name(Codec c) noexcept;
std::optional<Codec> codec_from_name(std::string_view name) noexcept;
int static_payload_type(Codec c) noexcept;

using CodecSet = std::set<Codec>;

struct SdpBody {
  std::string session_id;
  std::string address;
  int port = 0;
  std::vector<Codec> codecs;

  friend bool operator==(const SdpBody&, const SdpBody&) = default;
};

SdpBody parse_sdp(std::string_view text);
std::string serialize_sdp(const SdpBody& sdp);

// Offerer-preference answer: the first offered voice codec found in
// `supported`, plus telephone-event when both sides have it. The answer
// carries the media endpoint supplied by the caller.
SdpBody negotiate_codecs(const SdpBody& offer, const CodecSet& supported,
                         std::string_view answer_address, int answer_port,
                         std::string_view session_id = "0");

}  // namespace unity::sip
