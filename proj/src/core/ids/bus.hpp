#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include "ids/messages.hpp"
#include "sim/kernel.hpp"

namespace unity::ids {

using SubscriptionId = std::uint64_t;
using Handler = std::function<void(const Message&)>;

// In-memory publish/subscribe. Subscribers receive only messages published
// after they subscribed, each after the network delay between the
// publisher's and subscriber's locations.
class Bus {
 public:
  explicit Bus(sim::Kernel& kernel);

  void register_topic(const std::string& name);
  bool has_topic(const std::string& name) const { return topics_.count(name) != 0; }

  SubscriptionId subscribe(const std::string& topic, sim::Endpoint where, Handler handler);
  void unsubscribe(SubscriptionId id);
  // Returns the number of deliveries scheduled.
  std::size_t publish(const std::string& topic, sim::Endpoint from, Message message);

  // Synchronous observers outside the simulated system (metrics collection).
  void add_tap(const std::string& topic, Handler handler);

  std::uint64_t published() const noexcept { return published_; }

 private:
  struct Subscription {
    SubscriptionId id;
    sim::Endpoint where;
    std::shared_ptr<Handler> handler;
    // Latest scheduled delivery; later publishes never overtake it even
    // when they come from a nearer publisher.
    std::shared_ptr<sim::Micros> last;
  };
  void require_topic(const std::string& name) const;

  sim::Kernel& kernel_;
  std::set<std::string> topics_;
  std::map<std::string, std::vector<Subscription>> subs_;
  std::map<std::string, std::vector<Handler>> taps_;
  SubscriptionId next_id_ = 1;
  std::uint64_t published_ = 0;
};

}  // namespace unity::ids
