#include "sip/message.hpp"

#include <cstdio>

#include "common/error.hpp"
#include "common/hash.hpp"
#include "common/text.hpp"

namespace unity::sip {

using text::iequals;
using text::trim;

std::string_view method_name(Method m) noexcept {
  switch (m) {
    case Method::Register: return "REGISTER";
    case Method::Invite: return "INVITE";
    case Method::Ack: return "ACK";
    case Method::Bye: return "BYE";
  }
  return "?";
}

std::optional<Method> method_from_name(std::string_view name) noexcept {
  for (Method m : {Method::Register, Method::Invite, Method::Ack, Method::Bye}) {
    if (name == method_name(m)) return m;
  }
  return std::nullopt;
}

DialogKey DialogKey::of(const SipMessage& m) {
  return DialogKey{m.call_id, m.from.tag.value_or(""), m.to.tag};
}

bool DialogKey::matches(const DialogKey& other) const noexcept {
  if (call_id != other.call_id || from_tag != other.from_tag) return false;
  if (to_tag && other.to_tag) return *to_tag == *other.to_tag;
  return true;
}

namespace {

constexpr std::string_view kVersion = "SIP/2.0";

// Long header name for the compact forms we accept.
std::string_view canonical_name(std::string_view name) {
  if (name.size() == 1) {
    switch (std::tolower(static_cast<unsigned char>(name[0]))) {
      case 'v': return "Via";
      case 'f': return "From";
      case 't': return "To";
      case 'i': return "Call-ID";
      case 'm': return "Contact";
      case 'c': return "Content-Type";
      case 'l': return "Content-Length";
      default: break;
    }
  }
  for (std::string_view known : {"Via", "From", "To", "Call-ID", "CSeq", "Contact", "Content-Type", "Content-Length"}) {
    if (iequals(name, known)) return known;
  }
  return name;
}

NameAddr parse_name_addr(std::string_view v, std::size_t lineno, std::string_view header) {
  NameAddr na;
  v = trim(v);
  std::string_view params;
  auto lt = v.find('<');
  if (lt != std::string_view::npos) {
    auto gt = v.find('>', lt);
    if (gt == std::string_view::npos) {
      throw Error(Errc::missing_mandatory_header, std::string(header) + ": unterminated '<'", lineno);
    }
    auto display = trim(v.substr(0, lt));
    if (display.size() >= 2 && display.front() == '"' && display.back() == '"') {
      display = display.substr(1, display.size() - 2);
    }
    na.display = std::string(display);
    na.uri = std::string(trim(v.substr(lt + 1, gt - lt - 1)));
    params = v.substr(gt + 1);
  } else {
    auto semi = v.find(';');
    na.uri = std::string(trim(v.substr(0, semi)));
    params = semi == std::string_view::npos ? std::string_view{} : v.substr(semi);
  }
  if (na.uri.empty()) throw Error(Errc::missing_mandatory_header, std::string(header) + ": empty uri", lineno);
  for (unsigned char c : na.uri) {
    if (c == '<' || c == '>' || c == '"' || c <= ' ' || c == 0x7f) {
      throw Error(Errc::missing_mandatory_header, std::string(header) + ": malformed uri", lineno);
    }
  }

  // Walk ";name=value" parameters, lifting the tag out.
  while (!params.empty()) {
    params = trim(params);
    if (params.empty()) break;
    if (params.front() != ';') break;
    params.remove_prefix(1);
    auto next = params.find(';');
    auto param = trim(params.substr(0, next));
    params = next == std::string_view::npos ? std::string_view{} : params.substr(next);
    if (param.empty()) continue;
    auto eq = param.find('=');
    auto key = trim(param.substr(0, eq));
    if (iequals(key, "tag") && eq != std::string_view::npos) {
      na.tag = std::string(trim(param.substr(eq + 1)));
    } else {
      na.params += ";";
      na.params += param;
    }
  }
  return na;
}

std::string format_name_addr(const NameAddr& na) {
  std::string s;
  if (!na.display.empty()) s += "\"" + na.display + "\" ";
  s += "<" + na.uri + ">";
  s += na.params;
  if (na.tag) s += ";tag=" + *na.tag;
  return s;
}

void split_via(std::string_view v, std::vector<std::string>& out) {
  while (!v.empty()) {
    auto comma = v.find(',');
    auto part = trim(v.substr(0, comma));
    if (!part.empty()) out.emplace_back(part);
    if (comma == std::string_view::npos) break;
    v.remove_prefix(comma + 1);
  }
}

}  // namespace

SipMessage parse_message(std::string_view raw) {
  // Header/body boundary: CRLF CRLF, or bare LF LF in tolerant mode.
  std::size_t head_end = std::string_view::npos;
  std::size_t body_start = 0;
  for (std::size_t i = 0; i < raw.size(); ++i) {
    if (raw[i] != '\n') continue;
    if (i + 1 < raw.size() && raw[i + 1] == '\n') {
      head_end = i;
      body_start = i + 2;
      break;
    }
    if (i + 2 < raw.size() && raw[i + 1] == '\r' && raw[i + 2] == '\n') {
      head_end = i;
      body_start = i + 3;
      break;
    }
  }
  if (head_end == std::string_view::npos) {
    throw Error(Errc::truncated_message, "no blank line terminating the header section");
  }

  auto lines = text::split_lines(raw.substr(0, head_end));
  if (lines.empty() || trim(lines.front()).empty()) {
    throw Error(Errc::malformed_start_line, "empty start line", 1);
  }

  SipMessage m;
  {
    auto parts = text::split_ws(lines.front());
    if (parts.size() >= 2 && parts[0] == kVersion) {
      auto code = text::parse_int<int>(parts[1]);
      if (!code || *code < 100 || *code > 699) throw Error(Errc::malformed_start_line, "bad status code", 1);
      m.kind = Kind::Response;
      m.status_code = *code;
      auto line = lines.front();
      auto pos = line.find(parts[1]) + parts[1].size();
      m.reason = std::string(trim(line.substr(pos)));
    } else if (parts.size() == 3 && parts[2] == kVersion) {
      auto method = method_from_name(parts[0]);
      if (!method) throw Error(Errc::malformed_start_line, "unsupported method", 1);
      m.kind = Kind::Request;
      m.method = *method;
      m.request_uri = std::string(parts[1]);
    } else {
      throw Error(Errc::malformed_start_line, "not a SIP/2.0 request or status line", 1);
    }
  }

  bool seen_from = false, seen_to = false, seen_call_id = false, seen_cseq = false;
  std::optional<std::size_t> declared_length;
  std::size_t length_line = 0;

  // Unfold continuation lines first so each entry is one logical header.
  struct Logical { std::string content; std::size_t lineno; };
  std::vector<Logical> logical;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    auto line = lines[i];
    if (!line.empty() && (line.front() == ' ' || line.front() == '\t') && !logical.empty()) {
      logical.back().content += " ";
      logical.back().content += trim(line);
      continue;
    }
    logical.push_back({std::string(line), i + 1});
  }

  for (const auto& [content, lineno] : logical) {
    std::string_view line = content;
    auto colon = line.find(':');
    if (colon == std::string_view::npos || trim(line.substr(0, colon)).empty()) {
      throw Error(Errc::missing_mandatory_header, "header line without name", lineno);
    }
    auto name = canonical_name(trim(line.substr(0, colon)));
    auto value = trim(line.substr(colon + 1));

    if (name == "Via") {
      split_via(value, m.via);
    } else if (name == "From") {
      m.from = parse_name_addr(value, lineno, "From");
      seen_from = true;
    } else if (name == "To") {
      m.to = parse_name_addr(value, lineno, "To");
      seen_to = true;
    } else if (name == "Call-ID") {
      if (value.empty()) throw Error(Errc::missing_mandatory_header, "Call-ID is empty", lineno);
      m.call_id = std::string(value);
      seen_call_id = true;
    } else if (name == "CSeq") {
      auto parts = text::split_ws(value);
      std::optional<std::uint32_t> num;
      std::optional<Method> method;
      if (parts.size() == 2) {
        num = text::parse_int<std::uint32_t>(parts[0]);
        method = method_from_name(parts[1]);
      }
      if (!num || !method) throw Error(Errc::bad_cseq_method, "unparseable CSeq", lineno);
      if (m.is_request() && *method != m.method) {
        throw Error(Errc::bad_cseq_method, "CSeq method does not match request method", lineno);
      }
      m.cseq = CSeq{*num, *method};
      seen_cseq = true;
    } else if (name == "Contact") {
      m.contact = std::string(value);
    } else if (name == "Content-Type") {
      m.content_type = std::string(value);
    } else if (name == "Content-Length") {
      auto n = text::parse_int<std::size_t>(value);
      if (!n) throw Error(Errc::bad_content_length, "non-numeric Content-Length", lineno);
      declared_length = *n;
      length_line = lineno;
    } else {
      m.other_headers.push_back(Header{std::string(name), std::string(value)});
    }
  }

  if (!seen_call_id) throw Error(Errc::missing_mandatory_header, "Call-ID");
  if (!seen_cseq) throw Error(Errc::missing_mandatory_header, "CSeq");
  if (!seen_from) throw Error(Errc::missing_mandatory_header, "From");
  if (!seen_to) throw Error(Errc::missing_mandatory_header, "To");

  m.body = std::string(raw.substr(body_start));
  if (declared_length && *declared_length != m.body.size()) {
    throw Error(Errc::bad_content_length,
                "declared " + std::to_string(*declared_length) + " bytes, body has " + std::to_string(m.body.size()),
                length_line);
  }
  m.content_length = m.body.size();
  return m;
}

void check_invariants(const SipMessage& m) {
  if (m.call_id.empty()) throw Error(Errc::invariant_violation, "empty Call-ID");
  if (m.is_request() && m.cseq.method != m.method) throw Error(Errc::invariant_violation, "CSeq method mismatch");
  if (m.is_response() && (m.status_code < 100 || m.status_code > 699)) {
    throw Error(Errc::invariant_violation, "status code out of range");
  }
  if (m.from.uri.empty() || m.to.uri.empty()) throw Error(Errc::invariant_violation, "empty From/To uri");
}

std::string serialize_message(const SipMessage& m) {
  check_invariants(m);
  std::string out;
  out.reserve(256 + m.body.size());
  if (m.is_request()) {
    out += method_name(m.method);
    out += " " + m.request_uri + " SIP/2.0\r\n";
  } else {
    out += "SIP/2.0 " + std::to_string(m.status_code) + " " + m.reason + "\r\n";
  }
  for (const auto& v : m.via) out += "Via: " + v + "\r\n";
  out += "From: " + format_name_addr(m.from) + "\r\n";
  out += "To: " + format_name_addr(m.to) + "\r\n";
  out += "Call-ID: " + m.call_id + "\r\n";
  out += "CSeq: " + std::to_string(m.cseq.number) + " " + std::string(method_name(m.cseq.method)) + "\r\n";
  if (m.contact) out += "Contact: " + *m.contact + "\r\n";
  if (m.content_type) out += "Content-Type: " + *m.content_type + "\r\n";
  out += "Content-Length: " + std::to_string(m.body.size()) + "\r\n";
  for (const auto& h : m.other_headers) out += h.name + ": " + h.value + "\r\n";
  out += "\r\n";
  out += m.body;
  return out;
}

std::string_view reason_phrase(int status) noexcept {
  switch (status) {
    case 100: return "Trying";
    case 180: return "Ringing";
    case 200: return "OK";
    case 403: return "Forbidden";
    case 404: return "Not Found";
    case 408: return "Request Timeout";
    case 480: return "Temporarily Unavailable";
    case 481: return "Call/Transaction Does Not Exist";
    case 486: return "Busy Here";
    case 488: return "Not Acceptable Here";
    case 500: return "Server Internal Error";
    case 503: return "Service Unavailable";
    default: return status < 200 ? "Progress" : status < 300 ? "OK" : "Error";
  }
}

SipMessage build_response(const SipMessage& req, int status, const std::optional<SdpBody>& sdp,
                          std::string_view to_tag) {
  if (!req.is_request()) throw Error(Errc::not_a_request, "cannot answer a response");
  SipMessage r;
  r.kind = Kind::Response;
  r.status_code = status;
  r.reason = std::string(reason_phrase(status));
  r.via = req.via;
  r.from = req.from;
  r.to = req.to;
  r.call_id = req.call_id;
  r.cseq = req.cseq;
  if (status >= 180 && !r.to.tag) {
    if (!to_tag.empty()) {
      r.to.tag = std::string(to_tag);
    } else {
      char buf[17];
      auto h = fnv1a64(req.call_id + "|" + req.from.tag.value_or("") + "|" + req.to.uri);
      std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
      r.to.tag = std::string(buf, 8);
    }
  }
  if (sdp) {
    r.content_type = "application/sdp";
    r.body = serialize_sdp(*sdp);
  }
  r.content_length = r.body.size();
  return r;
}

}  // namespace unity::sip
