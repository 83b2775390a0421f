#include "ids/bus.hpp"

#include <algorithm>

#include "common/error.hpp"

namespace unity::ids {

const char* severity_name(Severity s) noexcept {
  switch (s) {
    case Severity::Debug: return "debug";
    case Severity::Info: return "info";
    case Severity::Warn: return "warn";
    case Severity::Error: return "error";
  }
  return "?";
}

Bus::Bus(sim::Kernel& kernel) : kernel_(kernel) {
  for (const char* t : {topics::kResourceUtilization, topics::kResolvingUpdates, topics::kSystemStatus,
                        topics::kGlobalConfig, topics::kLogEntries}) {
    topics_.insert(t);
  }
}

void Bus::register_topic(const std::string& name) { topics_.insert(name); }

void Bus::require_topic(const std::string& name) const {
  if (!topics_.count(name)) throw Error(Errc::unknown_topic, name);
}

SubscriptionId Bus::subscribe(const std::string& topic, sim::Endpoint where, Handler handler) {
  require_topic(topic);
  auto id = next_id_++;
  subs_[topic].push_back({id, where, std::make_shared<Handler>(std::move(handler)), std::make_shared<sim::Micros>(0)});
  return id;
}

void Bus::unsubscribe(SubscriptionId id) {
  for (auto& [topic, list] : subs_) {
    std::erase_if(list, [id](const Subscription& s) { return s.id == id; });
  }
}

std::size_t Bus::publish(const std::string& topic, sim::Endpoint from, Message message) {
  require_topic(topic);
  ++published_;
  if (auto it = taps_.find(topic); it != taps_.end()) {
    for (auto& tap : it->second) tap(message);
  }
  auto it = subs_.find(topic);
  if (it == subs_.end() || it->second.empty()) return 0;
  auto shared = std::make_shared<const Message>(std::move(message));
  // Copy: a handler may subscribe or unsubscribe during delivery.
  auto targets = it->second;
  for (const auto& sub : targets) {
    kernel_.transmit(from, sub.where, [handler = sub.handler, shared] { (*handler)(*shared); }, *sub.last);
    *sub.last = std::max(*sub.last, kernel_.now() + kernel_.delay(from, sub.where));
  }
  return targets.size();
}

void Bus::add_tap(const std::string& topic, Handler handler) {
  require_topic(topic);
  taps_[topic].push_back(std::move(handler));
}

}  // namespace unity::ids
