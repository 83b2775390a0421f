#include "ims/profile.hpp"

#include <cstdio>

#include "common/error.hpp"
#include "common/text.hpp"

namespace unity::ims {

void HssDatabase::provision(SubscriberProfile profile) {
  if (profile.impu.empty()) throw Error(Errc::invariant_violation, "empty impu");
  auto impu = profile.impu;
  if (!profiles_.emplace(impu, std::move(profile)).second) {
    throw Error(Errc::invariant_violation, "duplicate impu " + impu);
  }
}

const SubscriberProfile& HssDatabase::lookup(const std::string& impu) const {
  auto it = profiles_.find(impu);
  if (it == profiles_.end()) throw Error(Errc::profile_not_found, impu);
  return it->second;
}

bool HssDatabase::bind(const std::string& impu, const std::string& contact) {
  auto it = profiles_.find(impu);
  if (it == profiles_.end()) return false;
  it->second.registered = true;
  it->second.binding = contact;
  return true;
}

std::vector<std::string> HssDatabase::impus() const {
  std::vector<std::string> out;
  for (const auto& [k, v] : profiles_) out.push_back(k);
  return out;
}

std::string impu_for(std::string_view user) { return "sip:" + std::string(user) + "@unity"; }

std::string subscriber_id(std::string_view impu) {
  if (impu.substr(0, 4) == "sip:") impu.remove_prefix(4);
  return std::string(impu.substr(0, impu.find('@')));
}

std::string user_name(int index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "user%04d", index);
  return buf;
}

HssDatabase generate_subscribers(int count) {
  HssDatabase db;
  for (int i = 1; i <= count; ++i) {
    SubscriberProfile p;
    p.impu = impu_for(user_name(i));
    p.service_triggers.insert(std::string(kMmtel));
    if (i % 10 == 0) p.supplementary_services.insert(std::string(kAdhocConf));
    p.codec_hints = {sip::Codec::PCMU, sip::Codec::PCMA};
    db.provision(std::move(p));
  }
  return db;
}

HssDatabase parse_provisioning(std::string_view content) {
  HssDatabase db;
  std::size_t lineno = 0;
  for (auto line : text::split_lines(content)) {
    ++lineno;
    line = text::trim(line);
    if (line.empty() || line.front() == '#') continue;
    auto tab = line.find('\t');
    SubscriberProfile p;
    p.impu = std::string(text::trim(line.substr(0, tab)));
    auto flags = tab == std::string_view::npos ? std::string_view{} : line.substr(tab + 1);
    while (!flags.empty()) {
      auto comma = flags.find(',');
      auto flag = text::trim(flags.substr(0, comma));
      if (flag == kMmtel) {
        p.service_triggers.insert(std::string(flag));
      } else if (flag == kAdhocConf) {
        p.supplementary_services.insert(std::string(flag));
      } else if (!flag.empty()) {
        throw Error(Errc::syntax_error, "unknown subscriber flag '" + std::string(flag) + "'", lineno);
      }
      if (comma == std::string_view::npos) break;
      flags.remove_prefix(comma + 1);
    }
    try {
      db.provision(std::move(p));
    } catch (const Error& e) {
      throw Error(Errc::syntax_error, e.what(), lineno);
    }
  }
  return db;
}

std::string format_provisioning(const HssDatabase& db) {
  std::string out;
  for (const auto& impu : db.impus()) {
    const auto& p = db.lookup(impu);
    out += impu + "\t";
    bool first = true;
    if (p.has_mmtel()) {
      out += kMmtel;
      first = false;
    }
    if (p.has_adhoc_conf()) {
      if (!first) out += ",";
      out += kAdhocConf;
    }
    out += "\n";
  }
  return out;
}

}  // namespace unity::ims
