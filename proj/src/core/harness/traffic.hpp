#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "harness/metrics.hpp"
#include "harness/scenario.hpp"
#include "ims/app.hpp"

namespace unity::harness {

// Plays every subscriber's user agent, SIPp style, and records what the
// measurement side needs.
class UaEmulator : public ims::UaGateway, public ims::CallObserver {
 public:
  UaEmulator(ims::ImsApp& app, const ScenarioConfig& scenario, MetricsStore& store);

  // Schedules the registration storm, re-registrations, call arrivals and
  // the CPU sampler. Arrivals stop at the end of the measurement window.
  void start();

  // Individual actions, also used directly by tests.
  void register_ua(const std::string& user);
  std::size_t place_call(const std::string& caller, const std::string& callee, sim::Micros hold,
                         bool abandon = false, const std::string& sdp_codecs = "PCMU,PCMA,telephone-event");
  void hang_up(std::size_t call);
  // In-band digits on an established call; `target` is the impu to add.
  bool press_digits(std::size_t call, const std::string& digits, const std::string& target);
  // Number of calls currently answered and not yet hung up.
  int active_calls() const noexcept { return active_; }
  UnitAddress media_of(std::size_t call) const;

  void set_trace(bool on) noexcept { trace_ = on; }
  const std::map<std::string, std::vector<std::pair<std::string, std::string>>>& hops() const noexcept {
    return hops_;
  }

  // UaGateway
  void deliver(const std::string& ua, const std::string& raw) override;
  // CallObserver
  void invite_received(const std::string& call_id, sim::Micros t) override;
  void invite_forwarded(const std::string& call_id, sim::Micros t) override;
  void unit_spawned(const std::string& call_id, const UnitAddress& addr) override;
  void spawn_failed(const std::string& call_id, UnitType type, PouchId pouch) override;
  void media_frame(const std::string& call_id, std::uint32_t frame, sim::Micros offset) override;
  bool wants_hops() const override { return trace_; }
  void hop(const std::string& call_id, const std::string& from_role, const std::string& to_role) override;

 private:
  struct CallerLeg {
    sip::SipMessage invite;
    std::optional<sip::SipMessage> ok;
    sim::Micros hold{0};
    bool abandon = false;
    bool acked = false;
    bool bye_sent = false;
    bool active = false;
  };
  struct CalleeLeg {
    std::string ua;
    sip::SipMessage invite;
    bool answered = false;
    bool bye_received = false;
  };

  CallRecord* record(const std::string& call_id);
  void send(const std::string& ua, const sip::SipMessage& m);
  void on_response(const std::string& ua, const sip::SipMessage& m);
  void on_request(const std::string& ua, const sip::SipMessage& m);
  void answer(const std::string& call_id);
  void finish(std::size_t call, Outcome outcome, int status);
  void set_active(std::size_t call, bool on);
  void next_arrival();
  void next_reregistration();
  void sample_cpu();
  bool in_window(sim::Micros t) const { return t >= store_.window_start && t < store_.window_end; }

  ims::ImsApp& app_;
  sim::Kernel& kernel_;
  ScenarioConfig scenario_;
  MetricsStore& store_;
  std::vector<std::string> users_;
  std::map<std::string, std::size_t> index_;  // call-id -> calls[] index
  std::vector<CallerLeg> caller_legs_;        // parallel to store_.calls
  std::map<std::string, CalleeLeg> callee_legs_;
  std::map<std::size_t, UnitAddress> media_;
  std::uint64_t next_call_ = 1;
  std::uint64_t reg_seq_ = 0;
  std::size_t rereg_cursor_ = 0;
  int active_ = 0;
  bool trace_ = false;
  std::map<std::string, std::vector<std::pair<std::string, std::string>>> hops_;
};

}  // namespace unity::harness
