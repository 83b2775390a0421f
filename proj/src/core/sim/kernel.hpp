#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <string>
#include <vector>

#include "sim/random.hpp"
#include "sim/time.hpp"

namespace unity::sim {

using PouchId = std::uint32_t;
using EventId = std::uint64_t;

// Something a message can be sent from or to: an emulated user agent, a
// pouch, or the control plane (orchestrator, log gatherer).
struct Endpoint {
  enum class Kind { Ua, Pouch, System };
  Kind kind = Kind::System;
  PouchId pouch = 0;

  static Endpoint ua() { return {Kind::Ua, 0}; }
  static Endpoint at(PouchId p) { return {Kind::Pouch, p}; }
  static Endpoint system() { return {Kind::System, 0}; }

  friend bool operator==(const Endpoint&, const Endpoint&) = default;
};

struct NetworkModel {
  Micros intra{0};
  Micros inter{500};
  Micros ua{1000};
};

struct PouchHost {
  PouchId id = 0;
  std::string pool;
  double speed = 1.0;
  Micros busy_until{0};
  Micros cumulative_busy{0};
  bool alive = true;
};

struct RunStats {
  std::uint64_t processed = 0;
  Micros now{0};
};

// Single-threaded discrete-event engine. Events are totally ordered by
// (fire time, submission sequence). Each pouch is a single FIFO core.
class Kernel {
 public:
  explicit Kernel(std::uint64_t seed, NetworkModel net = {});

  Kernel(const Kernel&) = delete;
  Kernel& operator=(const Kernel&) = delete;

  Micros now() const noexcept { return now_; }

  EventId schedule(Micros at, std::function<void()> fn);
  EventId schedule_after(Micros delay, std::function<void()> fn) { return schedule(now_ + delay, std::move(fn)); }
  // Returns false when the event already fired or was cancelled.
  bool cancel(EventId id);
  RunStats run_until(Micros t_end);
  std::uint64_t events_processed() const noexcept { return processed_; }
  std::size_t pending() const noexcept { return heap_.size(); }

  PouchId add_pouch(std::string pool, double speed);
  void kill_pouch(PouchId id);
  bool has_pouch(PouchId id) const noexcept { return id >= 1 && id <= pouches_.size(); }
  bool pouch_alive(PouchId id) const noexcept { return has_pouch(id) && pouches_[id - 1].host.alive; }
  const PouchHost& pouch(PouchId id) const;
  std::vector<PouchId> pouch_ids() const;
  std::vector<PouchId> live_pouch_ids() const;

  // Queues `cost` (at reference speed) on the pouch's core and returns the
  // completion time. `completion`, if set, fires then, unless the pouch has
  // died in the meantime.
  Micros execute_work(PouchId id, Micros cost, std::function<void()> completion = {});

  // Busy fraction of the pouch over [now - window, now].
  double cpu_utilization(PouchId id, Micros window) const;
  void set_busy_retention(Micros r) { retention_ = r; }

  Micros delay(Endpoint from, Endpoint to) const;
  // Schedules `deliver` after the network delay. Deliveries to a pouch that
  // is dead at delivery time are dropped and counted.
  EventId transmit(Endpoint from, Endpoint to, std::function<void()> deliver);
  // Same, but never earlier than `not_before`.
  EventId transmit(Endpoint from, Endpoint to, std::function<void()> deliver, Micros not_before);
  std::uint64_t dropped_deliveries() const noexcept { return dropped_; }

  const NetworkModel& network() const noexcept { return net_; }
  void set_network(NetworkModel net) { net_ = net; }
  RandomStream& random() noexcept { return random_; }

 private:
  struct HeapEntry {
    Micros at;
    std::uint64_t seq;
    std::uint32_t slot;
  };
  struct HeapLater {
    bool operator()(const HeapEntry& a, const HeapEntry& b) const noexcept {
      return a.at != b.at ? a.at > b.at : a.seq > b.seq;
    }
  };
  struct Slot {
    std::function<void()> fn;
    std::uint32_t generation = 0;
    bool armed = false;
  };
  struct BusyInterval {
    Micros start;
    Micros end;
    Micros before;  // total busy time preceding `start`
  };
  struct PouchState {
    PouchHost host;
    std::deque<BusyInterval> busy;
  };

  Micros busy_before(const PouchState& p, Micros t) const;
  void check_endpoint(Endpoint e) const;

  Micros now_{0};
  std::uint64_t seq_ = 0;
  std::uint64_t processed_ = 0;
  std::uint64_t dropped_ = 0;
  std::vector<HeapEntry> heap_;
  std::vector<Slot> slots_;
  std::vector<std::uint32_t> free_slots_;
  std::vector<PouchState> pouches_;
  Micros retention_{120'000'000};
  NetworkModel net_;
  RandomStream random_;
};

}  // namespace unity::sim
