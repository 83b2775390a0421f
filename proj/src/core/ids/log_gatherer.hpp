#pragma once

#include <cstdint>
#include <ostream>
#include <vector>

#include "ids/bus.hpp"

namespace unity::ids {

// Collects log entries from every pouch and consolidates them into one
// ordered TSV log.
class LogGatherer {
 public:
  LogGatherer() = default;

  // Subscribes to the log-entries topic at the control-plane endpoint.
  void attach(Bus& bus);
  void add(LogEntry entry);

  std::size_t size() const noexcept { return entries_.size(); }

  // Ordered by (timestamp, pouch, arrival sequence).
  std::vector<LogEntry> consolidate() const;
  void write_tsv(std::ostream& out) const;

  static const char* tsv_header() noexcept;

 private:
  struct Arrived {
    LogEntry entry;
    std::uint64_t seq;
  };
  std::vector<Arrived> entries_;
  std::uint64_t next_seq_ = 0;
};

std::vector<LogEntry> consolidate_logs(const std::vector<LogEntry>& entries);

}  // namespace unity::ids
