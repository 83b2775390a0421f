#include "ids/log_gatherer.hpp"

#include <algorithm>
#include <cstdio>

namespace unity::ids {

void LogGatherer::attach(Bus& bus) {
  bus.subscribe(topics::kLogEntries, sim::Endpoint::system(), [this](const Message& m) {
    if (auto* e = std::get_if<LogEntry>(&m)) add(*e);
  });
}

void LogGatherer::add(LogEntry entry) { entries_.push_back({std::move(entry), next_seq_++}); }

std::vector<LogEntry> LogGatherer::consolidate() const {
  std::vector<const Arrived*> order;
  order.reserve(entries_.size());
  for (const auto& a : entries_) order.push_back(&a);
  std::sort(order.begin(), order.end(), [](const Arrived* a, const Arrived* b) {
    if (a->entry.timestamp != b->entry.timestamp) return a->entry.timestamp < b->entry.timestamp;
    if (a->entry.pouch != b->entry.pouch) return a->entry.pouch < b->entry.pouch;
    return a->seq < b->seq;
  });
  std::vector<LogEntry> out;
  out.reserve(order.size());
  for (auto* a : order) out.push_back(a->entry);
  return out;
}

std::vector<LogEntry> consolidate_logs(const std::vector<LogEntry>& entries) {
  LogGatherer g;
  for (const auto& e : entries) g.add(e);
  return g.consolidate();
}

const char* LogGatherer::tsv_header() noexcept {
  return "timestamp_ms\tpouch_id\tunit\tseverity\tcall_id\ttext\n";
}

void LogGatherer::write_tsv(std::ostream& out) const {
  out << tsv_header();
  char ts[32];
  for (const auto& e : consolidate()) {
    std::snprintf(ts, sizeof ts, "%lld.%03lld", static_cast<long long>(e.timestamp.count() / 1000),
                  static_cast<long long>(e.timestamp.count() % 1000));
    out << ts << '\t' << e.pouch << '\t';
    if (e.source.empty()) {
      out << unit_type_name(e.unit_type) << '#' << e.instance;
    } else {
      out << e.source;
    }
    out << '\t'
        << severity_name(e.severity) << '\t' << e.call_id << '\t' << e.text << '\n';
  }
}

}  // namespace unity::ids
