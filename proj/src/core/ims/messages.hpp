#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <variant>

#include "cmw/middleware.hpp"
#include "ims/profile.hpp"
#include "sip/message.hpp"
#include "sip/sdp.hpp"

namespace unity::ims {

// Raw SIP bytes received from a user agent.
struct UaBytes {
  std::string raw;
  std::string ua;  // sending UA impu
};

// Parsed SIP passed between units of the same session chain.
struct SipRelay {
  sip::SipMessage sip;
  // Set on the INVITE from the originating to the terminating C unit.
  UnitAddress media;
  std::optional<sip::SdpBody> media_offer;
};

// Ask SIPh to put a message on the wire towards a UA.
struct SipToUa {
  sip::SipMessage sip;
  std::string ua;
};

struct ProfileQuery {
  std::string impu;
  std::uint64_t corr = 0;
};

struct ProfileAnswer {
  std::optional<SubscriberProfile> profile;
  std::uint64_t corr = 0;
};

struct RegisterQuery {
  std::string impu;
  std::string contact;
  std::uint64_t corr = 0;
};

struct RegisterAnswer {
  bool ok = false;
  std::uint64_t corr = 0;
};

struct TInit {
  SubscriberProfile profile;
};

struct TReady {};

struct AOffer {
  sip::SdpBody offer;
  bool originating = true;
  std::string subscriber;
  UnitAddress t;      // invalid when no T unit is in the chain
  UnitAddress media;  // terminating side: the M unit to join
};

struct AResult {
  int error_status = 0;  // non-zero on failure
  std::optional<sip::SdpBody> sdp;
  UnitAddress media;
};

struct MediaControl {
  enum class Op { Allocate, Join, Start, Stop };
  Op op = Op::Allocate;
  UnitAddress session;  // Allocate/Join: T unit to notify of digits
};

struct MediaAvailable {
  UnitAddress media;
};

struct Dtmf {
  std::string digits;
  std::string target;  // impu of the party to add
};

struct ConferenceRequest {
  std::string target;
};

// A session peer went away; the receiver releases its half.
struct Abort {
  int status = 500;
};

struct AuditTick {};

using Body = std::variant<UaBytes, SipRelay, SipToUa, ProfileQuery, ProfileAnswer, RegisterQuery, RegisterAnswer,
                          TInit, TReady, AOffer, AResult, MediaControl, MediaAvailable, Dtmf, ConferenceRequest,
                          Abort, AuditTick>;

const char* body_name(const Body& b) noexcept;

struct Msg : cmw::Payload {
  Msg(std::string call_id_, std::string from_role_, Body body_)
      : call_id(std::move(call_id_)), from_role(std::move(from_role_)), body(std::move(body_)) {}

  std::string call_id;
  std::string from_role;
  Body body;
};

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

}  // namespace unity::ims
