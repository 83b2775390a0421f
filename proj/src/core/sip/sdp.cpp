#include "sip/sdp.hpp"

#include <map>

#include "common/error.hpp"
#include "common/text.hpp"

namespace unity::sip {

using text::iequals;
using text::trim;

std::string_view codec_name(Codec c) noexcept {
  switch (c) {
    case Codec::PCMU: return "PCMU";
    case Codec::PCMA: return "PCMA";
    case Codec::G729: return "G729";
    case Codec::TelephoneEvent: return "telephone-event";
  }
  return "?";
}

std::optional<Codec> codec_from_name(std::string_view name) noexcept {
  for (Codec c : {Codec::PCMU, Codec::PCMA, Codec::G729, Codec::TelephoneEvent}) {
    if (iequals(name, codec_name(c))) return c;
  }
  if (iequals(name, "TELEPHONE-EVENT")) return Codec::TelephoneEvent;
  return std::nullopt;
}

int static_payload_type(Codec c) noexcept {
  switch (c) {
    case Codec::PCMU: return 0;
    case Codec::PCMA: return 8;
    case Codec::G729: return 18;
    case Codec::TelephoneEvent: return 101;
  }
  return -1;
}

SdpBody parse_sdp(std::string_view text) {
  SdpBody sdp;
  std::vector<int> payloads;
  bool have_media = false;
  std::map<int, std::string> rtpmap;

  std::size_t lineno = 0;
  for (auto line : text::split_lines(text)) {
    ++lineno;
    if (line.size() < 2 || line[1] != '=') continue;
    char type = line[0];
    auto value = trim(line.substr(2));
    auto fields = text::split_ws(value);
    switch (type) {
      case 'o':
        if (fields.size() >= 2) sdp.session_id = std::string(fields[1]);
        break;
      case 'c':
        if (fields.size() >= 3) sdp.address = std::string(fields[2]);
        break;
      case 'm': {
        if (have_media) break;  // first audio stream only
        if (fields.size() < 3) throw Error(Errc::missing_media_line, "short m= line", lineno);
        auto port = text::parse_int<int>(fields[1]);
        if (!port) throw Error(Errc::invariant_violation, "bad media port", lineno);
        sdp.port = *port;
        for (std::size_t i = 3; i < fields.size(); ++i) {
          if (auto pt = text::parse_int<int>(fields[i])) payloads.push_back(*pt);
        }
        have_media = true;
        break;
      }
      case 'a': {
        constexpr std::string_view kRtpmap = "rtpmap:";
        if (value.substr(0, kRtpmap.size()) != kRtpmap) break;
        auto rest = value.substr(kRtpmap.size());
        auto sp = rest.find(' ');
        if (sp == std::string_view::npos) break;
        auto pt = text::parse_int<int>(rest.substr(0, sp));
        auto enc = trim(rest.substr(sp + 1));
        enc = enc.substr(0, enc.find('/'));
        if (pt) rtpmap[*pt] = std::string(enc);
        break;
      }
      default:
        break;
    }
  }
  if (!have_media) throw Error(Errc::missing_media_line, "no m= line");
  if (sdp.port < 1024 || sdp.port > 65535) {
    throw Error(Errc::invariant_violation, "media port out of range: " + std::to_string(sdp.port));
  }

  std::string unknown;
  for (int pt : payloads) {
    std::optional<Codec> codec;
    if (auto it = rtpmap.find(pt); it != rtpmap.end()) {
      codec = codec_from_name(it->second);
      if (!codec) unknown = it->second;
    } else if (pt == 0) {
      codec = Codec::PCMU;
    } else if (pt == 8) {
      codec = Codec::PCMA;
    } else if (pt == 18) {
      codec = Codec::G729;
    } else {
      unknown = "pt" + std::to_string(pt);
    }
    if (codec && std::find(sdp.codecs.begin(), sdp.codecs.end(), *codec) == sdp.codecs.end()) {
      sdp.codecs.push_back(*codec);
    }
  }
  if (sdp.codecs.empty()) throw Error(Errc::unknown_codec, unknown.empty() ? "empty payload list" : unknown);
  return sdp;
}

std::string serialize_sdp(const SdpBody& sdp) {
  std::string out;
  out += "v=0\r\n";
  out += "o=- " + sdp.session_id + " 1 IN IP4 " + sdp.address + "\r\n";
  out += "s=-\r\n";
  out += "c=IN IP4 " + sdp.address + "\r\n";
  out += "t=0 0\r\n";
  out += "m=audio " + std::to_string(sdp.port) + " RTP/AVP";
  for (Codec c : sdp.codecs) out += " " + std::to_string(static_payload_type(c));
  out += "\r\n";
  for (Codec c : sdp.codecs) {
    out += "a=rtpmap:" + std::to_string(static_payload_type(c)) + " " + std::string(codec_name(c)) + "/8000\r\n";
  }
  return out;
}

SdpBody negotiate_codecs(const SdpBody& offer, const CodecSet& supported,
                         std::string_view answer_address, int answer_port,
                         std::string_view session_id) {
  SdpBody answer;
  answer.session_id = std::string(session_id);
  answer.address = std::string(answer_address);
  answer.port = answer_port;
  for (Codec c : offer.codecs) {
    if (c != Codec::TelephoneEvent && supported.count(c)) {
      answer.codecs.push_back(c);
      break;
    }
  }
  if (answer.codecs.empty()) throw Error(Errc::no_common_codec, "no offered voice codec is supported");
  bool offered_events = std::find(offer.codecs.begin(), offer.codecs.end(), Codec::TelephoneEvent) != offer.codecs.end();
  if (offered_events && supported.count(Codec::TelephoneEvent)) answer.codecs.push_back(Codec::TelephoneEvent);
  return answer;
}

}  // namespace unity::sip
