#include <algorithm>
#include <cstdio>

#include "common/error.hpp"
#include "common/hash.hpp"
#include "ims/units.hpp"

namespace unity::ims {

const char* dialog_state_name(DialogState s) noexcept {
  switch (s) {
    case DialogState::Init: return "Init";
    case DialogState::Inviting: return "Inviting";
    case DialogState::Ringing: return "Ringing";
    case DialogState::Confirmed: return "Confirmed";
    case DialogState::Terminating: return "Terminating";
    case DialogState::Done: return "Done";
  }
  return "?";
}

namespace {

bool is_bye(const sip::SipMessage& s) {
  return s.is_request() ? s.method == sip::Method::Bye : s.cseq.method == sip::Method::Bye;
}

std::string branch_for(const std::string& call_id, std::uint32_t cseq) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(fnv1a64(std::to_string(cseq), fnv1a64(call_id))));
  return std::string("SIP/2.0/UDP edge.unity;branch=z9hG4bK") + buf;
}

}  // namespace

CallSession::CallSession(ImsApp& app, cmw::InitParams params) : ImsUnit(app, std::move(params)) {}

void CallSession::on_start() {
  auto interval = costs().c_audit_interval;
  if (interval.count() <= 0 || costs().c_audit.count() <= 0) return;
  auto phase = sim::Micros(static_cast<std::int64_t>(app_.kernel().random().uniform01("c-audit") * interval.count()));
  schedule_audit(app_.kernel().now() + interval + phase);
}

void CallSession::schedule_audit(sim::Micros at) {
  auto& app = app_;
  auto self = address();
  app_.kernel().schedule(at, [&app, self] {
    auto* c = dynamic_cast<CallSession*>(app.middleware().find(self.instance));
    if (!c || c->state_ == DialogState::Done) return;
    app.middleware().send(self, self, std::make_shared<Msg>("", c->role_name(), AuditTick{}));
  });
}

sim::Micros CallSession::cost(const Msg& m) {
  if (std::holds_alternative<AuditTick>(m.body)) {
    // Sweeps the pouch's session table: one entry per live C unit here.
    auto sessions = middleware().instance(address().pouch).unit_count(UnitType::C);
    return costs().c_audit * static_cast<std::int64_t>(std::max<std::size_t>(sessions, 1));
  }
  if (std::holds_alternative<Abort>(m.body)) return costs().bye;
  if (auto* r = std::get_if<SipRelay>(&m.body); r && is_bye(r->sip)) return costs().bye;
  return costs().c_step;
}

void CallSession::advance(DialogState next) {
  if (next == state_) return;
  if (next < state_ && next != DialogState::Done) {
    log(ids::Severity::Error, params_.call_id,
        std::string("illegal dialog transition ") + dialog_state_name(state_) + " -> " + dialog_state_name(next));
    return;
  }
  state_ = next;
}

void CallSession::on_message(const cmw::Envelope& env, const Msg& m) {
  if (state_ == DialogState::Done) return;
  std::visit(overloaded{
                 [&](const SipRelay& r) {
                   if (env.from.type == UnitType::SIPh) {
                     sip_from_ua(r.sip);
                   } else if (orig() && r.sip.call_id != params_.call_id) {
                     leg_response(r.sip);
                   } else {
                     if (!peer_.valid()) peer_ = env.from;
                     if (state_ == DialogState::Init) {
                       media_offer_ = r.media_offer;
                       m_ = r.media;
                     }
                     sip_from_peer(r);
                   }
                 },
                 [&](const ProfileAnswer& a) {
                   if (a.corr == corr_) profile_ready(a);
                 },
                 [&](const TReady&) { start_anchor(); },
                 [&](const AResult& r) { anchor_done(r); },
                 [&](const ConferenceRequest& c) { conference(c); },
                 [&](const Abort&) { abort_session(false); },
                 [&](const AuditTick&) { audit(); },
                 [&](const auto&) { log(ids::Severity::Warn, m.call_id, "C: unexpected message"); },
             },
             m.body);
}

void CallSession::sip_from_ua(const sip::SipMessage& sip) {
  if (sip.is_request()) {
    switch (sip.method) {
      case sip::Method::Invite:
        if (state_ != DialogState::Init || !orig()) return;
        invite_ = sip;
        caller_ = sip.from.uri;
        callee_ = sip.request_uri;
        advance(DialogState::Inviting);
        query_profile(caller_, 1);
        return;
      case sip::Method::Ack:
        if (!orig() || state_ != DialogState::Ringing || !final_ok_) return;
        advance(DialogState::Confirmed);
        send(peer_, params_.call_id, SipRelay{sip, {}, std::nullopt});
        send(m_, params_.call_id, MediaControl{MediaControl::Op::Start, {}});
        return;
      case sip::Method::Bye:
        advance(DialogState::Terminating);
        if (!middleware().is_alive(peer_)) {
          to_ua(my_ua(), sip::build_response(sip, 200), params_.call_id);
          teardown();
          return;
        }
        send(peer_, params_.call_id, SipRelay{sip, {}, std::nullopt});
        for (auto& leg : legs_) {
          if (!leg.confirmed) continue;
          auto bye = sip;
          bye.call_id = leg.call_id;
          bye.request_uri = leg.invite.request_uri;
          bye.to = leg.invite.to;
          send(leg.term, leg.call_id, SipRelay{bye, {}, std::nullopt});
        }
        return;
      default:
        return;
    }
  }

  // Responses from our own UA: only the terminating side sees INVITE
  // responses here.
  if (sip.cseq.method == sip::Method::Invite) {
    if (orig()) return;
    if (sip.status_code == 180) {
      advance(DialogState::Ringing);
    } else if (sip.status_code >= 200 && sip.status_code < 300) {
      advance(DialogState::Ringing);
      final_ok_ = sip;
    } else if (sip.status_code >= 300) {
      send(peer_, params_.call_id, SipRelay{sip, {}, std::nullopt});
      teardown();
      return;
    }
    send(peer_, params_.call_id, SipRelay{sip, {}, std::nullopt});
  } else if (sip.cseq.method == sip::Method::Bye) {
    send(peer_, params_.call_id, SipRelay{sip, {}, std::nullopt});
    teardown();
  }
}

void CallSession::sip_from_peer(const SipRelay& relay) {
  const auto& sip = relay.sip;
  if (sip.is_request()) {
    switch (sip.method) {
      case sip::Method::Invite:
        if (state_ != DialogState::Init || orig()) return;
        invite_ = sip;
        caller_ = sip.from.uri;
        callee_ = sip.request_uri;
        advance(DialogState::Inviting);
        query_profile(callee_, 1);
        return;
      case sip::Method::Ack:
        if (orig()) return;
        advance(DialogState::Confirmed);
        to_ua(callee_, sip, params_.call_id);
        return;
      case sip::Method::Bye:
        advance(DialogState::Terminating);
        to_ua(my_ua(), sip, params_.call_id);
        return;
      default:
        return;
    }
  }

  if (sip.cseq.method == sip::Method::Invite) {
    if (!orig()) return;
    if (sip.status_code == 180) {
      advance(DialogState::Ringing);
      to_ua(caller_, sip, params_.call_id);
    } else if (sip.status_code >= 200 && sip.status_code < 300) {
      advance(DialogState::Ringing);
      auto ok = sip;
      if (answer_) {
        ok.body = sip::serialize_sdp(*answer_);
        ok.content_type = "application/sdp";
      }
      final_ok_ = ok;
      to_ua(caller_, ok, params_.call_id);
    } else if (sip.status_code >= 300) {
      to_ua(caller_, sip, params_.call_id);
      teardown();
    }
  } else if (sip.cseq.method == sip::Method::Bye) {
    to_ua(my_ua(), sip, params_.call_id);
    teardown();
  }
}

void CallSession::leg_response(const sip::SipMessage& sip) {
  for (auto& leg : legs_) {
    if (leg.call_id != sip.call_id) continue;
    if (sip.is_response() && sip.cseq.method == sip::Method::Invite) {
      if (sip.status_code >= 200 && sip.status_code < 300 && !leg.confirmed) {
        leg.confirmed = true;
        leg.invite.to = sip.to;
        auto ack = leg.invite;
        ack.method = sip::Method::Ack;
        ack.cseq.method = sip::Method::Ack;
        ack.body.clear();
        ack.content_type.reset();
        send(leg.term, leg.call_id, SipRelay{ack, {}, std::nullopt});
      } else if (sip.status_code >= 300) {
        log(ids::Severity::Info, params_.call_id, "conference leg rejected: " + std::to_string(sip.status_code));
      }
    }
    return;
  }
}

// The HSS front end may sit on a pouch that dies with the query in flight;
// retry against whatever the resolve table names next.
void CallSession::query_profile(const std::string& impu, int attempt) {
  int attempts = std::max(1, std::atoi(config("profile-attempts", "4").c_str()));
  auto timeout = sim::from_ms(std::atof(config("profile-timeout-ms", "1000").c_str()));
  corr_ = app_.next_corr();
  if (auto h = lookup("HSS-frontend"); h.valid()) {
    send(h, params_.call_id, ProfileQuery{impu, corr_});
  } else if (attempt >= attempts) {
    fail(500);
    return;
  }
  auto& app = app_;
  auto self = address();
  auto corr = corr_;
  app_.kernel().schedule(app_.kernel().now() + timeout, [&app, self, corr, impu, attempt, attempts] {
    auto* c = dynamic_cast<CallSession*>(app.middleware().find(self.instance));
    if (!c || c->corr_ != corr || c->profile_ || c->state_ != DialogState::Inviting) return;
    if (attempt >= attempts) {
      c->log(ids::Severity::Warn, c->params_.call_id, "profile query timed out");
      c->fail(504);
      return;
    }
    c->query_profile(impu, attempt + 1);
  });
}

void CallSession::profile_ready(const ProfileAnswer& ans) {
  if (state_ != DialogState::Inviting) return;
  if (!ans.profile) {
    fail(orig() ? 403 : 404);
    return;
  }
  if (!orig() && !app_.registered().count(callee_)) {
    fail(480);
    return;
  }
  profile_ = ans.profile;
  if (!profile_->has_mmtel()) {
    start_anchor();
    return;
  }
  t_ = app_.place(UnitType::T, my_subscriber(), params_.call_id, params_.role);
  if (!t_.valid()) {
    fail(500);
    return;
  }
  send(t_, params_.call_id, TInit{*profile_});
}

void CallSession::start_anchor() {
  if (state_ != DialogState::Inviting) return;
  sip::SdpBody offer;
  if (orig()) {
    try {
      offer = sip::parse_sdp(invite_.body);
    } catch (const Error&) {
      fail(488);
      return;
    }
  } else {
    if (!media_offer_) {
      fail(500);
      return;
    }
    offer = *media_offer_;
  }
  a_ = app_.place(UnitType::A, my_subscriber(), params_.call_id, params_.role);
  if (!a_.valid()) {
    fail(500);
    return;
  }
  send(a_, params_.call_id, AOffer{offer, orig(), my_subscriber(), t_, orig() ? UnitAddress{} : m_});
}

void CallSession::anchor_done(const AResult& res) {
  if (state_ != DialogState::Inviting) return;
  if (res.error_status != 0 || !res.sdp) {
    fail(res.error_status ? res.error_status : 500);
    return;
  }
  if (orig()) {
    m_ = res.media;
    answer_ = res.sdp;
    peer_ = app_.place(UnitType::C, callee_, params_.call_id, "term");
    if (!peer_.valid()) {
      fail(500);
      return;
    }
    auto invite = invite_;
    invite.body = sip::serialize_sdp(*answer_);
    invite.content_type = "application/sdp";
    send(peer_, params_.call_id, SipRelay{invite, m_, answer_});
  } else {
    auto invite = invite_;
    invite.body = sip::serialize_sdp(*res.sdp);
    invite.content_type = "application/sdp";
    to_ua(callee_, invite, params_.call_id);
  }
}

void CallSession::conference(const ConferenceRequest& req) {
  if (!orig() || state_ != DialogState::Confirmed || !answer_) return;
  Leg leg;
  leg.call_id = params_.call_id + "~conf" + std::to_string(legs_.size() + 1);
  leg.term = app_.place(UnitType::C, req.target, leg.call_id, "term");
  if (!leg.term.valid()) {
    log(ids::Severity::Warn, params_.call_id, "conference leg placement failed");
    return;
  }
  auto& inv = leg.invite;
  inv.kind = sip::Kind::Request;
  inv.method = sip::Method::Invite;
  inv.request_uri = req.target;
  inv.via = {branch_for(leg.call_id, 1)};
  inv.from = invite_.from;
  inv.to = sip::NameAddr{"", req.target, std::nullopt, ""};
  inv.call_id = leg.call_id;
  inv.cseq = {1, sip::Method::Invite};
  inv.contact = "<sip:conf@edge.unity>";
  inv.content_type = "application/sdp";
  inv.body = sip::serialize_sdp(*answer_);
  send(leg.term, leg.call_id, SipRelay{inv, m_, answer_});
  legs_.push_back(std::move(leg));
}

sip::SipMessage CallSession::make_bye() const {
  sip::SipMessage bye;
  bye.kind = sip::Kind::Request;
  bye.method = sip::Method::Bye;
  bye.call_id = params_.call_id;
  auto to_tagged = final_ok_ ? final_ok_->to : invite_.to;
  if (orig()) {
    bye.request_uri = caller_;
    bye.from = to_tagged;
    bye.to = invite_.from;
  } else {
    bye.request_uri = callee_;
    bye.from = invite_.from;
    bye.to = to_tagged;
  }
  bye.cseq = {bye_cseq_, sip::Method::Bye};
  bye.via = {branch_for(params_.call_id, bye_cseq_)};
  return bye;
}

void CallSession::audit() {
  if (state_ == DialogState::Done) return;
  bool broken = false;
  for (const auto* u : {&t_, &a_, &m_, &peer_}) {
    if (u->valid() && !middleware().is_alive(*u)) broken = true;
  }
  if (broken && state_ == DialogState::Terminating) {
    // The far side may have released first with its 200 still in flight;
    // clean up locally only if that 200 never shows up.
    if (linger_) {
      teardown();
      return;
    }
    linger_ = true;
    broken = false;
  }
  if (broken) {
    log(ids::Severity::Warn, params_.call_id, "session audit: chain peer lost");
    abort_session(true);
    return;
  }
  schedule_audit(app_.kernel().now() + costs().c_audit_interval);
}

void CallSession::abort_session(bool notify_peer) {
  if (state_ == DialogState::Done) return;
  if (state_ >= DialogState::Confirmed) {
    if (!caller_.empty()) to_ua(my_ua(), make_bye(), params_.call_id);
  } else if (orig() && state_ >= DialogState::Inviting) {
    to_ua(caller_, sip::build_response(invite_, 500), params_.call_id);
  }
  if (notify_peer && middleware().is_alive(peer_)) send(peer_, params_.call_id, Abort{500});
  teardown();
}

void CallSession::fail(int status) {
  if (orig()) {
    to_ua(caller_, sip::build_response(invite_, status), params_.call_id);
  } else {
    send(peer_, params_.call_id, SipRelay{sip::build_response(invite_, status), {}, std::nullopt});
  }
  teardown();
}

void CallSession::teardown() {
  if (state_ == DialogState::Done) return;
  advance(DialogState::Done);
  auto& mw = middleware();
  mw.terminate_unit(t_);
  mw.terminate_unit(a_);
  if (orig()) mw.terminate_unit(m_);
  retire();
}

}  // namespace unity::ims
