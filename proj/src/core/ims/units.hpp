#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ims/app.hpp"

namespace unity::ims {

// Access edge. Parses UA traffic, keeps per-call routes, creates the
// originating C unit for new INVITEs.
class SipHandler : public ImsUnit {
 public:
  using ImsUnit::ImsUnit;

 protected:
  sim::Micros cost(const Msg&) override { return costs().sip_route; }
  void on_message(const cmw::Envelope& env, const Msg& m) override;

 private:
  struct Route {
    UnitAddress orig;
    UnitAddress term;
    std::string caller;
    std::string callee;
  };
  struct PendingRegister {
    sip::SipMessage request;
    std::string ua;
  };

  void from_ua(const cmw::Envelope& env, const UaBytes& in);
  void new_call(const cmw::Envelope& env, const sip::SipMessage& invite, const std::string& ua);
  void to_wire(const UnitAddress& sender, const SipToUa& out);
  void reply(const sip::SipMessage& req, int status, const std::string& ua);

  std::map<std::string, Route> routes_;
  std::map<std::uint64_t, PendingRegister> pending_;
};

class HssFrontEnd : public ImsUnit {
 public:
  using ImsUnit::ImsUnit;

 protected:
  sim::Micros cost(const Msg& m) override;
  void on_message(const cmw::Envelope& env, const Msg& m) override;

 private:
  struct Pending {
    UnitAddress reply_to;
    std::uint64_t corr = 0;
    std::string impu;
  };
  std::map<std::uint64_t, Pending> pending_;
};

class DiameterHandler : public ImsUnit {
 public:
  using ImsUnit::ImsUnit;

 protected:
  sim::Micros cost(const Msg&) override { return costs().diah_hss; }
  void on_message(const cmw::Envelope& env, const Msg& m) override;
};

enum class DialogState { Init, Inviting, Ringing, Confirmed, Terminating, Done };
const char* dialog_state_name(DialogState s) noexcept;

// One half of a call: role "orig" serves the caller, "term" the callee.
class CallSession : public ImsUnit {
 public:
  CallSession(ImsApp& app, cmw::InitParams params);

  DialogState state() const noexcept { return state_; }

 protected:
  sim::Micros cost(const Msg& m) override;
  void on_message(const cmw::Envelope& env, const Msg& m) override;
  void on_start() override;

 private:
  struct Leg {
    std::string call_id;
    UnitAddress term;
    sip::SipMessage invite;
    bool confirmed = false;
  };

  bool orig() const noexcept { return params_.role != "term"; }
  const std::string& my_ua() const noexcept { return orig() ? caller_ : callee_; }
  const std::string& my_subscriber() const noexcept { return my_ua(); }
  void advance(DialogState next);

  void sip_from_ua(const sip::SipMessage& sip);
  void sip_from_peer(const SipRelay& relay);
  void leg_response(const sip::SipMessage& sip);
  void query_profile(const std::string& impu, int attempt);
  void profile_ready(const ProfileAnswer& ans);
  void start_anchor();
  void anchor_done(const AResult& res);
  void conference(const ConferenceRequest& req);
  void audit();
  void schedule_audit(sim::Micros at);
  void fail(int status);
  void abort_session(bool notify_peer);
  void teardown();
  sip::SipMessage make_bye() const;

  DialogState state_ = DialogState::Init;
  std::string caller_;
  std::string callee_;
  sip::SipMessage invite_;
  std::optional<SubscriberProfile> profile_;
  std::uint64_t corr_ = 0;
  UnitAddress t_, a_, m_, peer_;
  std::optional<sip::SdpBody> media_offer_;
  std::optional<sip::SdpBody> answer_;
  std::optional<sip::SipMessage> final_ok_;  // 200 for the INVITE, kept for in-dialog requests
  std::vector<Leg> legs_;
  std::uint32_t bye_cseq_ = 100;
  bool linger_ = false;
};

class TelephonyServer : public ImsUnit {
 public:
  using ImsUnit::ImsUnit;

 protected:
  sim::Micros cost(const Msg&) override { return costs().t_event; }
  void on_message(const cmw::Envelope& env, const Msg& m) override;

 private:
  std::optional<SubscriberProfile> profile_;
  UnitAddress c_;
  UnitAddress m_;
};

class AnchorPoint : public ImsUnit {
 public:
  using ImsUnit::ImsUnit;

 protected:
  sim::Micros cost(const Msg&) override { return costs().a_negotiate; }
  void on_message(const cmw::Envelope& env, const Msg& m) override;
};

// Media plane of one call. Frames are timed work items, one per 20 ms.
class MediaProcessor : public ImsUnit {
 public:
  using ImsUnit::ImsUnit;

  static constexpr sim::Micros kFrameInterval{20'000};

  int legs() const noexcept { return legs_; }
  bool mixing() const noexcept { return legs_ >= 3; }
  std::uint64_t frames() const noexcept { return frames_; }
  sim::Micros frame_cost() const;

 protected:
  sim::Micros cost(const Msg&) override { return costs().m_frame_leg; }
  void on_message(const cmw::Envelope& env, const Msg& m) override;

 private:
  static void tick(ImsApp& app, InstanceId self, std::uint32_t k);

  int legs_ = 0;
  bool running_ = false;
  sim::Micros t0_{0};
  std::uint64_t frames_ = 0;
  UnitAddress session_;  // T unit that receives in-band digits
};

}  // namespace unity::ims
