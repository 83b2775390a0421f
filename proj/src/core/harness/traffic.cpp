#include "harness/traffic.hpp"

#include <cstdio>

#include "common/error.hpp"

namespace unity::harness {

namespace {

constexpr sim::Micros kTransactionTimeout{32'000'000};  // 64 * T1
constexpr sim::Micros kCpuSamplePeriod{1'000'000};

std::string host_of(const std::string& user) { return user + ".ua.unity"; }

sip::SipMessage request(sip::Method method, const std::string& uri, const sip::NameAddr& from,
                        const sip::NameAddr& to, const std::string& call_id, std::uint32_t cseq,
                        const std::string& via_host) {
  sip::SipMessage m;
  m.kind = sip::Kind::Request;
  m.method = method;
  m.request_uri = uri;
  m.via = {"SIP/2.0/UDP " + via_host + ";branch=z9hG4bK" + call_id + "-" + std::to_string(cseq) + "-" +
           std::string(sip::method_name(method))};
  m.from = from;
  m.to = to;
  m.call_id = call_id;
  m.cseq = {cseq, method};
  return m;
}

}  // namespace

UaEmulator::UaEmulator(ims::ImsApp& app, const ScenarioConfig& scenario, MetricsStore& store)
    : app_(app), kernel_(app.kernel()), scenario_(scenario), store_(store) {
  for (int i = 1; i <= scenario_.subscribers; ++i) users_.push_back(ims::user_name(i));
  store_.window_start = sim::from_ms(scenario_.warmup * 1000.0);
  store_.window_end = store_.window_start + sim::from_ms(scenario_.window * 1000.0);
  app_.set_gateway(this);
  app_.set_observer(this);
}

void UaEmulator::start() {
  for (const auto& u : users_) {
    kernel_.schedule(kernel_.now(), [this, u] { register_ua(u); });
  }
  if (scenario_.reregistration_rate > 0) {
    kernel_.schedule_after(sim::from_ms(60'000.0 / scenario_.reregistration_rate), [this] { next_reregistration(); });
  }
  if (scenario_.call_rate > 0) {
    kernel_.schedule_after(sim::from_ms(60'000.0 / scenario_.call_rate), [this] { next_arrival(); });
  }
  if (store_.window_end > store_.window_start) {
    kernel_.schedule(store_.window_start + kCpuSamplePeriod, [this] { sample_cpu(); });
  }
}

void UaEmulator::next_reregistration() {
  if (kernel_.now() >= store_.window_end) return;
  register_ua(users_[rereg_cursor_++ % users_.size()]);
  kernel_.schedule_after(sim::from_ms(60'000.0 / scenario_.reregistration_rate), [this] { next_reregistration(); });
}

void UaEmulator::next_arrival() {
  if (kernel_.now() >= store_.window_end) return;
  auto& rnd = kernel_.random();
  auto n = users_.size();
  auto a = rnd.uniform_index("traffic.pairs", n);
  auto b = rnd.uniform_index("traffic.pairs", n - 1);
  if (b >= a) ++b;
  bool abandon = scenario_.abandon_fraction > 0 && rnd.uniform01("traffic.abandon") < scenario_.abandon_fraction;
  place_call(users_[a], users_[b], sim::from_ms(scenario_.call_duration * 1000.0), abandon);

  double period_ms = 60'000.0 / scenario_.call_rate;
  if (scenario_.arrival == Arrival::Exponential) period_ms = rnd.exponential("traffic.arrivals", period_ms);
  kernel_.schedule_after(sim::from_ms(period_ms), [this] { next_arrival(); });
}

void UaEmulator::sample_cpu() {
  auto now = kernel_.now();
  for (auto p : kernel_.live_pouch_ids()) {
    store_.cpu.push_back(CpuSample{now, p, kernel_.cpu_utilization(p, kCpuSamplePeriod), active_});
  }
  if (now + kCpuSamplePeriod <= store_.window_end) kernel_.schedule_after(kCpuSamplePeriod, [this] { sample_cpu(); });
}

void UaEmulator::register_ua(const std::string& user) {
  auto impu = ims::impu_for(user);
  ++reg_seq_;
  sip::NameAddr me{"", impu, "r" + std::to_string(reg_seq_), ""};
  auto m = request(sip::Method::Register, "sip:unity", me, sip::NameAddr{"", impu, std::nullopt, ""},
                   "reg-" + user + "-" + std::to_string(reg_seq_), static_cast<std::uint32_t>(reg_seq_), host_of(user));
  m.contact = "<sip:" + user + "@" + host_of(user) + ">";
  m.other_headers.push_back({"Expires", "600"});
  ++store_.registrations_sent;
  send(impu, m);
}

std::size_t UaEmulator::place_call(const std::string& caller, const std::string& callee, sim::Micros hold,
                                   bool abandon, const std::string& sdp_codecs) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "call-%06llu", static_cast<unsigned long long>(next_call_));
  std::string call_id = buf;
  auto n = next_call_++;

  sip::SdpBody offer;
  offer.session_id = std::to_string(n);
  offer.address = host_of(caller);
  offer.port = 30000 + static_cast<int>((n % 10000) * 2);
  std::string_view list = sdp_codecs;
  while (!list.empty()) {
    auto comma = list.find(',');
    if (auto c = sip::codec_from_name(list.substr(0, comma))) offer.codecs.push_back(*c);
    if (comma == std::string_view::npos) break;
    list.remove_prefix(comma + 1);
  }

  auto caller_impu = ims::impu_for(caller);
  auto callee_impu = ims::impu_for(callee);
  auto inv = request(sip::Method::Invite, callee_impu, sip::NameAddr{"", caller_impu, "f" + std::to_string(n), ""},
                     sip::NameAddr{"", callee_impu, std::nullopt, ""}, call_id, 1, host_of(caller));
  inv.contact = "<sip:" + caller + "@" + host_of(caller) + ">";
  inv.content_type = "application/sdp";
  inv.body = sip::serialize_sdp(offer);

  CallRecord rec;
  rec.call_id = call_id;
  rec.caller = caller;
  rec.callee = callee;
  rec.t_sent = kernel_.now();
  rec.in_window = in_window(rec.t_sent);
  auto idx = store_.calls.size();
  store_.calls.push_back(std::move(rec));
  caller_legs_.push_back(CallerLeg{inv, std::nullopt, hold, abandon});
  index_[call_id] = idx;

  send(caller_impu, inv);
  kernel_.schedule_after(kTransactionTimeout, [this, idx] {
    auto& c = store_.calls[idx];
    if (c.outcome == Outcome::Pending && !c.t_answered && !caller_legs_[idx].bye_sent) finish(idx, Outcome::Failed, 408);
  });
  return idx;
}

void UaEmulator::hang_up(std::size_t call) {
  auto& c = store_.calls[call];
  auto& leg = caller_legs_[call];
  if (c.outcome != Outcome::Pending || leg.bye_sent) return;
  leg.bye_sent = true;
  set_active(call, false);
  const auto& inv = leg.invite;
  auto to = leg.ok ? leg.ok->to : inv.to;
  auto bye = request(sip::Method::Bye, inv.request_uri, inv.from, to, inv.call_id, 2, host_of(c.caller));
  send(inv.from.uri, bye);
  kernel_.schedule_after(kTransactionTimeout, [this, call] {
    auto& r = store_.calls[call];
    if (r.outcome == Outcome::Pending) finish(call, r.t_answered ? Outcome::Dropped : Outcome::Abandoned, 408);
  });
}

bool UaEmulator::press_digits(std::size_t call, const std::string& digits, const std::string& target) {
  auto it = media_.find(call);
  if (it == media_.end() || !caller_legs_[call].acked) return false;
  app_.inject_dtmf(it->second, digits, target);
  return true;
}

UnitAddress UaEmulator::media_of(std::size_t call) const {
  auto it = media_.find(call);
  return it == media_.end() ? UnitAddress{} : it->second;
}

void UaEmulator::send(const std::string& ua, const sip::SipMessage& m) {
  app_.send_from_ua(ua, sip::serialize_message(m));
}

void UaEmulator::deliver(const std::string& ua, const std::string& raw) {
  sip::SipMessage m;
  try {
    m = sip::parse_message(raw);
  } catch (const Error&) {
    return;  // a real UA would discard it too
  }
  if (m.is_response()) on_response(ua, m);
  else on_request(ua, m);
}

void UaEmulator::on_response(const std::string& ua, const sip::SipMessage& m) {
  if (m.cseq.method == sip::Method::Register) {
    if (m.status_code == 200) ++store_.registrations_ok;
    else if (m.status_code >= 300) ++store_.registrations_failed;
    return;
  }
  auto it = index_.find(m.call_id);
  if (it == index_.end()) return;
  auto idx = it->second;
  auto& c = store_.calls[idx];
  auto& leg = caller_legs_[idx];
  if (ua != leg.invite.from.uri) return;

  if (m.cseq.method == sip::Method::Invite) {
    if (m.status_code == 180 && leg.abandon) {
      hang_up(idx);
    } else if (m.status_code >= 200 && m.status_code < 300) {
      if (leg.acked) return;
      leg.ok = m;
      leg.acked = true;
      auto ack = request(sip::Method::Ack, leg.invite.request_uri, leg.invite.from, m.to, m.call_id, 1, host_of(c.caller));
      send(ua, ack);
      if (c.outcome != Outcome::Pending || leg.bye_sent) return;
      c.t_answered = kernel_.now();
      set_active(idx, true);
      kernel_.schedule_after(leg.hold, [this, idx] { hang_up(idx); });
    } else if (m.status_code >= 300 && c.outcome == Outcome::Pending) {
      finish(idx, Outcome::Failed, m.status_code);
    }
  } else if (m.cseq.method == sip::Method::Bye && c.outcome == Outcome::Pending) {
    if (m.status_code >= 200 && m.status_code < 300) {
      finish(idx, c.t_answered ? Outcome::Established : Outcome::Abandoned, m.status_code);
    } else if (m.status_code >= 300) {
      finish(idx, c.t_answered ? Outcome::Dropped : Outcome::Abandoned, m.status_code);
    }
  }
}

void UaEmulator::on_request(const std::string& ua, const sip::SipMessage& m) {
  switch (m.method) {
    case sip::Method::Invite: {
      if (callee_legs_.count(m.call_id)) return;  // retransmission
      callee_legs_[m.call_id] = CalleeLeg{ua, m};
      send(ua, sip::build_response(m, 180));
      auto cid = m.call_id;
      if (scenario_.ring_delay > 0) {
        auto ring = scenario_.ring_delay * kernel_.random().uniform01("traffic.ring");
        kernel_.schedule_after(sim::from_ms(ring * 1000.0), [this, cid] { answer(cid); });
      } else {
        answer(cid);
      }
      return;
    }
    case sip::Method::Bye: {
      send(ua, sip::build_response(m, 200));
      if (auto cl = callee_legs_.find(m.call_id); cl != callee_legs_.end() && cl->second.ua == ua) {
        callee_legs_.erase(cl);
        return;
      }
      // The network hung up on a caller.
      auto it = index_.find(m.call_id);
      if (it == index_.end()) return;
      auto idx = it->second;
      auto& c = store_.calls[idx];
      if (c.outcome == Outcome::Pending && !caller_legs_[idx].bye_sent) {
        finish(idx, c.t_answered ? Outcome::Dropped : Outcome::Failed, 0);
      }
      return;
    }
    default:
      return;
  }
}

void UaEmulator::answer(const std::string& call_id) {
  auto it = callee_legs_.find(call_id);
  if (it == callee_legs_.end() || it->second.answered) return;
  auto& leg = it->second;
  leg.answered = true;
  std::optional<sip::SdpBody> sdp;
  try {
    auto offer = sip::parse_sdp(leg.invite.body);
    auto user = ims::subscriber_id(leg.ua);
    sdp = sip::negotiate_codecs(offer, {sip::Codec::PCMU, sip::Codec::PCMA, sip::Codec::G729, sip::Codec::TelephoneEvent},
                                host_of(user), 40000, offer.session_id);
  } catch (const Error&) {
    send(leg.ua, sip::build_response(leg.invite, 488));
    callee_legs_.erase(it);
    return;
  }
  send(leg.ua, sip::build_response(leg.invite, 200, sdp));
}

void UaEmulator::finish(std::size_t call, Outcome outcome, int status) {
  auto& c = store_.calls[call];
  if (c.outcome != Outcome::Pending) return;
  c.outcome = outcome;
  c.final_status = status;
  c.t_ended = kernel_.now();
  set_active(call, false);
}

void UaEmulator::set_active(std::size_t call, bool on) {
  auto& leg = caller_legs_[call];
  if (leg.active == on) return;
  leg.active = on;
  active_ += on ? 1 : -1;
}

CallRecord* UaEmulator::record(const std::string& call_id) {
  auto it = index_.find(call_id.substr(0, call_id.find('~')));
  return it == index_.end() ? nullptr : &store_.calls[it->second];
}

void UaEmulator::invite_received(const std::string& call_id, sim::Micros t) {
  if (auto* c = record(call_id); c && call_id == c->call_id && !c->t_invite_rx) c->t_invite_rx = t;
}

void UaEmulator::invite_forwarded(const std::string& call_id, sim::Micros t) {
  if (auto* c = record(call_id); c && call_id == c->call_id && !c->t_invite_tx) c->t_invite_tx = t;
}

void UaEmulator::unit_spawned(const std::string& call_id, const UnitAddress& addr) {
  auto* c = record(call_id);
  if (!c || !cmw::is_per_call(addr.type)) return;
  c->pouches.insert(addr.pouch);
  if (addr.type == UnitType::M && call_id == c->call_id) media_[index_.at(call_id)] = addr;
}

void UaEmulator::spawn_failed(const std::string& call_id, UnitType type, PouchId pouch) {
  auto* c = record(call_id);
  if (c && cmw::is_per_call(type) && pouch != 0) c->pouches.insert(pouch);
}

void UaEmulator::media_frame(const std::string& call_id, std::uint32_t frame, sim::Micros offset) {
  if (!in_window(kernel_.now())) return;
  auto it = index_.find(call_id);
  if (it == index_.end()) return;
  store_.media.push_back(MediaSample{static_cast<std::uint32_t>(it->second), frame, static_cast<std::int32_t>(offset.count())});
}

void UaEmulator::hop(const std::string& call_id, const std::string& from_role, const std::string& to_role) {
  hops_[call_id].emplace_back(from_role, to_role);
}

}  // namespace unity::harness
