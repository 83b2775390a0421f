#include <algorithm>

#include "common/error.hpp"
#include "common/text.hpp"
#include "ims/units.hpp"

namespace unity::ims {

// ---- H ----

sim::Micros HssFrontEnd::cost(const Msg& m) {
  if (auto* q = std::get_if<ProfileQuery>(&m.body)) {
    return app_.profile_cache(address().pouch).count(q->impu) ? costs().h_cache_hit : costs().h_query;
  }
  if (std::holds_alternative<RegisterQuery>(m.body)) return costs().h_query;
  return costs().h_cache_hit;
}

void HssFrontEnd::on_message(const cmw::Envelope& env, const Msg& m) {
  auto& cache = app_.profile_cache(address().pouch);
  std::visit(overloaded{
                 [&](const ProfileQuery& q) {
                   if (auto it = cache.find(q.impu); it != cache.end()) {
                     send(env.from, m.call_id, ProfileAnswer{it->second, q.corr});
                     return;
                   }
                   auto diah = lookup("Diameter");
                   if (!diah.valid()) {
                     send(env.from, m.call_id, ProfileAnswer{std::nullopt, q.corr});
                     return;
                   }
                   auto corr = app_.next_corr();
                   pending_[corr] = Pending{env.from, q.corr, q.impu};
                   send(diah, m.call_id, ProfileQuery{q.impu, corr});
                 },
                 [&](const ProfileAnswer& a) {
                   auto it = pending_.find(a.corr);
                   if (it == pending_.end()) return;
                   auto p = it->second;
                   pending_.erase(it);
                   if (a.profile) cache[p.impu] = *a.profile;
                   send(p.reply_to, m.call_id, ProfileAnswer{a.profile, p.corr});
                 },
                 [&](const RegisterQuery& q) {
                   auto diah = lookup("Diameter");
                   if (!diah.valid()) {
                     send(env.from, m.call_id, RegisterAnswer{false, q.corr});
                     return;
                   }
                   auto corr = app_.next_corr();
                   pending_[corr] = Pending{env.from, q.corr, q.impu};
                   send(diah, m.call_id, RegisterQuery{q.impu, q.contact, corr});
                 },
                 [&](const RegisterAnswer& a) {
                   auto it = pending_.find(a.corr);
                   if (it == pending_.end()) return;
                   auto p = it->second;
                   pending_.erase(it);
                   send(p.reply_to, m.call_id, RegisterAnswer{a.ok, p.corr});
                 },
                 [&](const auto&) { log(ids::Severity::Warn, m.call_id, "H: unexpected message"); },
             },
             m.body);
}

// ---- Diah ----

void DiameterHandler::on_message(const cmw::Envelope& env, const Msg& m) {
  auto& hss = app_.hss();
  std::visit(overloaded{
                 [&](const ProfileQuery& q) {
                   std::optional<SubscriberProfile> p;
                   if (hss.contains(q.impu)) p = hss.lookup(q.impu);
                   send(env.from, m.call_id, ProfileAnswer{std::move(p), q.corr});
                 },
                 [&](const RegisterQuery& q) {
                   send(env.from, m.call_id, RegisterAnswer{hss.bind(q.impu, q.contact), q.corr});
                 },
                 [&](const auto&) { log(ids::Severity::Warn, m.call_id, "Diah: unexpected message"); },
             },
             m.body);
}

// ---- T ----

void TelephonyServer::on_message(const cmw::Envelope& env, const Msg& m) {
  std::visit(overloaded{
                 [&](const TInit& init) {
                   profile_ = init.profile;
                   c_ = env.from;
                   send(c_, m.call_id, TReady{});
                 },
                 [&](const MediaAvailable& ma) { m_ = ma.media; },
                 [&](const Dtmf& d) {
                   auto digits = config("conference-digits", "*3");
                   if (d.digits != digits) return;
                   if (!profile_ || !profile_->has_adhoc_conf() || params_.role != "orig") {
                     log(ids::Severity::Info, params_.call_id, "conference not subscribed");
                     return;
                   }
                   send(c_, params_.call_id, ConferenceRequest{d.target});
                 },
                 [&](const auto&) { log(ids::Severity::Warn, m.call_id, "T: unexpected message"); },
             },
             m.body);
}

// ---- A ----

namespace {

sip::CodecSet parse_codec_list(std::string_view list) {
  sip::CodecSet out;
  while (!list.empty()) {
    auto comma = list.find(',');
    if (auto c = sip::codec_from_name(text::trim(list.substr(0, comma)))) out.insert(*c);
    if (comma == std::string_view::npos) break;
    list.remove_prefix(comma + 1);
  }
  return out;
}

std::string media_host(const UnitAddress& m) {
  return "m" + std::to_string(m.instance) + ".p" + std::to_string(m.pouch) + ".unity";
}

int media_port(const UnitAddress& m, bool second_leg) {
  return 20000 + static_cast<int>((m.instance % 20000) * 2) + (second_leg ? 1 : 0);
}

}  // namespace

void AnchorPoint::on_message(const cmw::Envelope& env, const Msg& m) {
  auto* offer = std::get_if<AOffer>(&m.body);
  if (!offer) {
    log(ids::Severity::Warn, m.call_id, "A: unexpected message");
    return;
  }
  auto supported = parse_codec_list(config("supported-codecs", "PCMU,PCMA,telephone-event"));

  UnitAddress media = offer->media;
  bool spawned = false;
  if (offer->originating) {
    media = app_.place(UnitType::M, offer->subscriber, params_.call_id, "");
    if (!media.valid()) {
      send(env.from, m.call_id, AResult{500, std::nullopt, {}});
      return;
    }
    spawned = true;
  }

  sip::SdpBody sdp;
  try {
    sdp = sip::negotiate_codecs(offer->offer, supported, media_host(media), media_port(media, !offer->originating),
                                std::to_string(media.instance));
  } catch (const Error& e) {
    if (spawned) middleware().terminate_unit(media);
    send(env.from, m.call_id, AResult{488, std::nullopt, {}});
    return;
  }

  send(env.from, m.call_id, AResult{0, sdp, media});
  auto op = offer->originating ? MediaControl::Op::Allocate : MediaControl::Op::Join;
  send(media, m.call_id, MediaControl{op, offer->t});
  send(offer->t, m.call_id, MediaAvailable{media});
}

// ---- M ----

sim::Micros MediaProcessor::frame_cost() const {
  auto base = costs().m_frame_leg * std::max(legs_, 1);
  return mixing() ? base * 3 / 2 : base;
}

void MediaProcessor::on_message(const cmw::Envelope&, const Msg& m) {
  std::visit(overloaded{
                 [&](const MediaControl& c) {
                   switch (c.op) {
                     case MediaControl::Op::Allocate:
                       legs_ = std::max(legs_, 1);
                       if (c.session.valid()) session_ = c.session;
                       break;
                     case MediaControl::Op::Join:
                       ++legs_;
                       break;
                     case MediaControl::Op::Start:
                       if (running_) break;
                       running_ = true;
                       legs_ = std::max(legs_, 2);
                       t0_ = app_.kernel().now();
                       {
                         auto& app = app_;
                         auto self = address().instance;
                         app_.kernel().schedule(t0_, [&app, self] { tick(app, self, 0); });
                       }
                       break;
                     case MediaControl::Op::Stop:
                       running_ = false;
                       break;
                   }
                 },
                 [&](const Dtmf& d) { send(session_, params_.call_id, d); },
                 [&](const auto&) { log(ids::Severity::Warn, m.call_id, "M: unexpected message"); },
             },
             m.body);
}

void MediaProcessor::tick(ImsApp& app, InstanceId self, std::uint32_t k) {
  auto* unit = dynamic_cast<MediaProcessor*>(app.middleware().find(self));
  if (!unit || !unit->running_) return;
  auto& kernel = app.kernel();
  auto boundary = unit->t0_ + kFrameInterval * k;
  auto done = kernel.execute_work(unit->address().pouch, unit->frame_cost());
  ++unit->frames_;
  app.observer().media_frame(unit->params_.call_id, k, done - boundary);
  kernel.schedule(boundary + kFrameInterval, [&app, self, k] { tick(app, self, k + 1); });
}

}  // namespace unity::ims
