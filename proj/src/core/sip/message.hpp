#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "sip/sdp.hpp"

namespace unity::sip {

enum class Method { Register, Invite, Ack, Bye };

std::string_view method_name(Method m) noexcept;
std::optional<Method> method_from_name(std::string_view name) noexcept;

enum class Kind { Request, Response };

// A From/To header value: optional display name, URI, and parameters.
struct NameAddr {
  std::string display;
  std::string uri;
  std::optional<std::string> tag;
  std::string params;  // remaining ";k=v" parameters, verbatim, without the tag

  friend bool operator==(const NameAddr&, const NameAddr&) = default;
};

struct CSeq {
  std::uint32_t number = 0;
  Method method = Method::Invite;

  friend bool operator==(const CSeq&, const CSeq&) = default;
};

struct Header {
  std::string name;
  std::string value;

  friend bool operator==(const Header&, const Header&) = default;
};

struct SipMessage {
  Kind kind = Kind::Request;

  // request line
  Method method = Method::Invite;
  std::string request_uri;

  // status line
  int status_code = 0;
  std::string reason;

  std::vector<std::string> via;
  NameAddr from;
  NameAddr to;
  std::string call_id;
  CSeq cseq;
  std::optional<std::string> contact;
  std::optional<std::string> content_type;
  std::size_t content_length = 0;
  std::vector<Header> other_headers;  // unknown headers, in arrival order
  std::string body;

  bool is_request() const noexcept { return kind == Kind::Request; }
  bool is_response() const noexcept { return kind == Kind::Response; }

  friend bool operator==(const SipMessage&, const SipMessage&) = default;
};

// Identity of the dialog a message belongs to. The to-tag is absent before
// the callee answers.
struct DialogKey {
  std::string call_id;
  std::string from_tag;
  std::optional<std::string> to_tag;

  static DialogKey of(const SipMessage& m);

  // True when every component present on both sides matches.
  bool matches(const DialogKey& other) const noexcept;
};

SipMessage parse_message(std::string_view raw);
std::string serialize_message(const SipMessage& m);

// Throws Errc::invariant_violation describing the first broken invariant.
void check_invariants(const SipMessage& m);

std::string_view reason_phrase(int status) noexcept;

// Builds a response to `req`. A to-tag is attached when status >= 180 and
// the request carries none; when `to_tag` is empty a deterministic tag is
// derived from the dialog identity.
SipMessage build_response(const SipMessage& req, int status,
                          const std::optional<SdpBody>& sdp = std::nullopt,
                          std::string_view to_tag = {});

}  // namespace unity::sip
