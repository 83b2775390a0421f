#include "ims/app.hpp"

#include <iterator>

#include "common/error.hpp"
#include "ims/units.hpp"

namespace unity::ims {

namespace {

const Msg& msg_of(const cmw::Envelope& env) { return static_cast<const Msg&>(*env.payload); }

}  // namespace

const char* body_name(const Body& b) noexcept {
  static constexpr const char* kNames[] = {"UaBytes",   "SipRelay",     "SipToUa", "ProfileQuery",  "ProfileAnswer",
                                           "RegisterQuery", "RegisterAnswer", "TInit", "TReady",     "AOffer",
                                           "AResult",   "MediaControl", "MediaAvailable", "Dtmf", "ConferenceRequest",
                                           "Abort",     "AuditTick"};
  static_assert(std::size(kNames) == std::variant_size_v<Body>);
  return kNames[b.index()];
}

ImsApp::ImsApp(orch::Deployment& deployment, HssDatabase hss) : dep_(deployment), hss_(std::move(hss)) {
  auto& f = dep_.factories();
  f.add(UnitType::SIPh, [this](const cmw::InitParams& p) { return std::make_unique<SipHandler>(*this, p); });
  f.add(UnitType::H, [this](const cmw::InitParams& p) { return std::make_unique<HssFrontEnd>(*this, p); });
  f.add(UnitType::Diah, [this](const cmw::InitParams& p) { return std::make_unique<DiameterHandler>(*this, p); });
  f.add(UnitType::C, [this](const cmw::InitParams& p) { return std::make_unique<CallSession>(*this, p); });
  f.add(UnitType::A, [this](const cmw::InitParams& p) { return std::make_unique<AnchorPoint>(*this, p); });
  f.add(UnitType::T, [this](const cmw::InitParams& p) { return std::make_unique<TelephonyServer>(*this, p); });
  f.add(UnitType::M, [this](const cmw::InitParams& p) { return std::make_unique<MediaProcessor>(*this, p); });
}

void ImsApp::send_from_ua(const std::string& ua, std::string raw) {
  auto it = dep_.base_units().find(UnitType::SIPh);
  if (it == dep_.base_units().end()) return;
  middleware().send_external(sim::Endpoint::ua(), it->second,
                             std::make_shared<Msg>("", "UA", UaBytes{std::move(raw), ua}));
}

void ImsApp::send_to_ua(PouchId from, const std::string& ua, std::string raw) {
  kernel().transmit(sim::Endpoint::at(from), sim::Endpoint::ua(), [this, ua, raw = std::move(raw)] {
    if (gateway_) gateway_->deliver(ua, raw);
  });
}

void ImsApp::inject_dtmf(const UnitAddress& media, std::string digits, std::string target) {
  middleware().send_external(sim::Endpoint::ua(), media,
                             std::make_shared<Msg>("", "UA", Dtmf{std::move(digits), std::move(target)}));
}

UnitAddress ImsApp::place(UnitType type, const std::string& impu, const std::string& call_id, const std::string& role) {
  PouchId pouch = 0;
  try {
    pouch = dep_.selector().select(subscriber_id(impu), type);
    auto addr = middleware().spawn_unit(pouch, type, cmw::InitParams{impu, call_id, role});
    observer_->unit_spawned(call_id, addr);
    return addr;
  } catch (const Error& e) {
    observer_->spawn_failed(call_id, type, pouch);
    return {};
  }
}

sim::Micros ImsUnit::cost_of(const cmw::Envelope& env) { return cost(msg_of(env)); }

void ImsUnit::handle(const cmw::Envelope& env) {
  if (retiring_) return;
  const auto& m = msg_of(env);
  auto& obs = app_.observer();
  if (!m.call_id.empty() && obs.wants_hops()) obs.hop(m.call_id, m.from_role, role_name());
  if (middleware().log_enabled(address().pouch, ids::Severity::Debug)) {
    std::string what = body_name(m.body);
    if (auto* r = std::get_if<SipRelay>(&m.body)) {
      what += r->sip.is_request() ? " " + std::string(sip::method_name(r->sip.method))
                                  : " " + std::to_string(r->sip.status_code) + "/" +
                                        std::string(sip::method_name(r->sip.cseq.method));
    }
    log(ids::Severity::Debug, m.call_id, role_name() + " <- " + m.from_role + ": " + what);
  }
  on_message(env, m);
}

std::string ImsUnit::role_name() const {
  std::string name(unit_type_name(address().type));
  if (!params_.role.empty()) name += "-" + params_.role;
  return name;
}

void ImsUnit::send(const UnitAddress& to, const std::string& call_id, Body body) {
  if (!to.valid()) return;
  middleware().send(address(), to, std::make_shared<Msg>(call_id, role_name(), std::move(body)));
}

UnitAddress ImsUnit::lookup(const std::string& key) {
  try {
    return middleware().resolve(address().pouch, key);
  } catch (const Error& e) {
    log(ids::Severity::Error, params_.call_id, e.what());
    return {};
  }
}

void ImsUnit::to_ua(const std::string& ua, sip::SipMessage sip, const std::string& call_id) {
  send(lookup("SIPh"), call_id, SipToUa{std::move(sip), ua});
}

void ImsUnit::retire() {
  if (retiring_) return;
  retiring_ = true;
  auto& mw = middleware();
  auto self = address();
  app_.kernel().schedule_after(sim::Micros{0}, [&mw, self] { mw.terminate_unit(self); });
}

void ImsUnit::log(ids::Severity sev, const std::string& call_id, std::string text) {
  middleware().log(address(), sev, call_id, std::move(text));
}

std::string ImsUnit::config(const std::string& key, const std::string& fallback) {
  return middleware().instance(address().pouch).config_value(key, fallback);
}

}  // namespace unity::ims
