#include "common/error.hpp"
#include "ims/units.hpp"

namespace unity::ims {

void SipHandler::on_message(const cmw::Envelope& env, const Msg& m) {
  std::visit(overloaded{
                 [&](const UaBytes& in) { from_ua(env, in); },
                 [&](const SipToUa& out) { to_wire(env.from, out); },
                 [&](const RegisterAnswer& ans) {
                   auto it = pending_.find(ans.corr);
                   if (it == pending_.end()) return;
                   auto p = std::move(it->second);
                   pending_.erase(it);
                   if (ans.ok) app_.registered().insert(p.request.to.uri);
                   reply(p.request, ans.ok ? 200 : 404, p.ua);
                 },
                 [&](const auto&) { log(ids::Severity::Warn, m.call_id, "SIPh: unexpected message"); },
             },
             m.body);
}

void SipHandler::from_ua(const cmw::Envelope& env, const UaBytes& in) {
  sip::SipMessage sip;
  try {
    sip = sip::parse_message(in.raw);
  } catch (const Error& e) {
    log(ids::Severity::Warn, "", std::string("dropping unparsable message: ") + e.what());
    return;
  }

  if (sip.is_request() && sip.method == sip::Method::Register) {
    auto corr = app_.next_corr();
    auto h = lookup("HSS-frontend");
    if (!h.valid()) {
      reply(sip, 500, in.ua);
      return;
    }
    std::string contact = sip.contact.value_or(in.ua);
    pending_[corr] = PendingRegister{sip, in.ua};
    send(h, "", RegisterQuery{sip.to.uri, contact, corr});
    return;
  }

  auto it = routes_.find(sip.call_id);
  if (it == routes_.end()) {
    if (sip.is_request() && sip.method == sip::Method::Invite && !sip.to.tag) {
      new_call(env, sip, in.ua);
    } else if (sip.is_request() && sip.method == sip::Method::Bye) {
      reply(sip, 481, in.ua);
    }
    return;
  }

  auto& route = it->second;
  bool from_caller = in.ua == route.caller;
  auto target = from_caller ? route.orig : route.term;
  bool bye_ok = sip.is_response() && sip.cseq.method == sip::Method::Bye;
  if (!middleware().is_alive(target)) {
    if (sip.is_request() && sip.method == sip::Method::Bye) reply(sip, 481, in.ua);
    if (bye_ok || (sip.is_request() && sip.method == sip::Method::Bye)) routes_.erase(it);
    return;
  }
  auto call_id = sip.call_id;
  send(target, call_id, SipRelay{std::move(sip), {}, std::nullopt});
}

void SipHandler::new_call(const cmw::Envelope& env, const sip::SipMessage& invite, const std::string& ua) {
  auto& k = app_.kernel();
  auto rx = env.enqueued + k.delay(sim::Endpoint::ua(), sim::Endpoint::at(address().pouch));
  app_.observer().invite_received(invite.call_id, rx);

  if (!app_.registered().count(invite.from.uri)) {
    reply(invite, 403, ua);
    return;
  }
  auto orig = app_.place(UnitType::C, invite.from.uri, invite.call_id, "orig");
  if (!orig.valid()) {
    reply(invite, 500, ua);
    return;
  }
  routes_[invite.call_id] = Route{orig, {}, ua, invite.request_uri};
  send(orig, invite.call_id, SipRelay{invite, {}, std::nullopt});
  reply(invite, 100, ua);
}

void SipHandler::to_wire(const UnitAddress& sender, const SipToUa& out) {
  const auto& sip = out.sip;
  if (sip.is_request() && sip.method == sip::Method::Invite && !sip.to.tag) {
    auto& r = routes_[sip.call_id];
    if (r.caller.empty()) r.caller = sip.from.uri;
    r.term = sender;
    r.callee = out.ua;
    auto& obs = app_.observer();
    obs.invite_forwarded(sip.call_id, app_.kernel().now());
    if (obs.wants_hops()) obs.hop(sip.call_id, role_name(), "UA-term");
  }
  app_.send_to_ua(address().pouch, out.ua, sip::serialize_message(sip));

  if (sip.is_response()) {
    bool bye_done = sip.cseq.method == sip::Method::Bye;
    bool invite_failed = sip.cseq.method == sip::Method::Invite && sip.status_code >= 300;
    if (bye_done || invite_failed) routes_.erase(sip.call_id);
  }
}

void SipHandler::reply(const sip::SipMessage& req, int status, const std::string& ua) {
  auto resp = sip::build_response(req, status);
  if (req.method == sip::Method::Register && status == 200) {
    resp.contact = req.contact;
    resp.other_headers.push_back({"Expires", "600"});
  }
  app_.send_to_ua(address().pouch, ua, sip::serialize_message(resp));
}

}  // namespace unity::ims
