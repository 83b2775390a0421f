#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>

#include "ims/messages.hpp"
#include "ims/profile.hpp"
#include "orchestration/deployment.hpp"

namespace unity::ims {

// Call-level events the measurement side cares about. Default no-ops.
class CallObserver {
 public:
  virtual ~CallObserver() = default;
  virtual void invite_received(const std::string& /*call_id*/, sim::Micros /*t*/) {}
  virtual void invite_forwarded(const std::string& /*call_id*/, sim::Micros /*t*/) {}
  virtual void unit_spawned(const std::string& /*call_id*/, const UnitAddress& /*addr*/) {}
  virtual void spawn_failed(const std::string& /*call_id*/, UnitType /*type*/, PouchId /*pouch*/) {}
  virtual void media_frame(const std::string& /*call_id*/, std::uint32_t /*frame*/, sim::Micros /*offset*/) {}
  // Chain trace; only produced when wants_hops() is true.
  virtual bool wants_hops() const { return false; }
  virtual void hop(const std::string& /*call_id*/, const std::string& /*from_role*/, const std::string& /*to_role*/) {}
};

// The user-agent side of the access network.
class UaGateway {
 public:
  virtual ~UaGateway() = default;
  virtual void deliver(const std::string& ua, const std::string& raw) = 0;
};

// The IMS service running on a deployment. Constructing it registers the
// unit factories, so it must exist before Deployment::start().
class ImsApp {
 public:
  ImsApp(orch::Deployment& deployment, HssDatabase hss);

  ImsApp(const ImsApp&) = delete;
  ImsApp& operator=(const ImsApp&) = delete;

  orch::Deployment& deployment() noexcept { return dep_; }
  sim::Kernel& kernel() noexcept { return dep_.kernel(); }
  cmw::Middleware& middleware() noexcept { return dep_.middleware(); }
  const orch::CostModel& costs() const noexcept { return dep_.costs(); }
  HssDatabase& hss() noexcept { return hss_; }

  void set_observer(CallObserver* o) noexcept { observer_ = o ? o : &null_observer_; }
  CallObserver& observer() noexcept { return *observer_; }
  void set_gateway(UaGateway* g) noexcept { gateway_ = g; }

  // UA -> SIPh. Dropped (dead letter) when no SIPh is live.
  void send_from_ua(const std::string& ua, std::string raw);
  // Network -> UA.
  void send_to_ua(PouchId from, const std::string& ua, std::string raw);
  // In-band digits arriving at a media processor.
  void inject_dtmf(const UnitAddress& media, std::string digits, std::string target);

  // Per-pouch profile cache used by H units.
  std::map<std::string, SubscriberProfile>& profile_cache(PouchId pouch) { return caches_[pouch]; }
  // Registrar state shared by SIPh instances.
  std::set<std::string>& registered() noexcept { return registered_; }

  // NSS selection plus spawn. Returns an invalid address on failure, after
  // reporting it to the observer.
  UnitAddress place(UnitType type, const std::string& impu, const std::string& call_id, const std::string& role);

  std::uint64_t next_corr() noexcept { return ++corr_; }

 private:
  orch::Deployment& dep_;
  HssDatabase hss_;
  CallObserver null_observer_;
  CallObserver* observer_ = &null_observer_;
  UaGateway* gateway_ = nullptr;
  std::map<PouchId, std::map<std::string, SubscriberProfile>> caches_;
  std::set<std::string> registered_;
  std::uint64_t corr_ = 0;
};

// Common plumbing for the IMS units: typed messages, chain tracing,
// deferred self-termination.
class ImsUnit : public cmw::Unit {
 public:
  ImsUnit(ImsApp& app, cmw::InitParams params) : app_(app), params_(std::move(params)) {}

  sim::Micros cost_of(const cmw::Envelope& env) final;
  void handle(const cmw::Envelope& env) final;

  std::string role_name() const;
  const cmw::InitParams& params() const noexcept { return params_; }

 protected:
  virtual sim::Micros cost(const Msg& m) = 0;
  virtual void on_message(const cmw::Envelope& env, const Msg& m) = 0;

  void send(const UnitAddress& to, const std::string& call_id, Body body);
  // Resolve a service through this pouch's CMW; invalid on failure.
  UnitAddress lookup(const std::string& key);
  void to_ua(const std::string& ua, sip::SipMessage sip, const std::string& call_id);
  void retire();
  void log(ids::Severity sev, const std::string& call_id, std::string text);
  const orch::CostModel& costs() const noexcept { return app_.costs(); }
  std::string config(const std::string& key, const std::string& fallback = {});

  ImsApp& app_;
  cmw::InitParams params_;

 private:
  bool retiring_ = false;
};

}  // namespace unity::ims
