#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "sip/sdp.hpp"

namespace unity::ims {

inline constexpr std::string_view kMmtel = "MMTEL";
inline constexpr std::string_view kAdhocConf = "ADHOC-CONF";

struct SubscriberProfile {
  std::string impu;
  bool registered = false;
  std::string binding;  // UA contact
  std::set<std::string> service_triggers;
  std::set<std::string> supplementary_services;
  sip::CodecSet codec_hints;

  bool has_mmtel() const { return service_triggers.count(std::string(kMmtel)) != 0; }
  bool has_adhoc_conf() const { return supplementary_services.count(std::string(kAdhocConf)) != 0; }
};

// In-memory HSS. Profiles are read-only during a run apart from
// registration bindings.
class HssDatabase {
 public:
  // Throws Errc::invariant_violation on a duplicate impu.
  void provision(SubscriberProfile profile);
  // Throws Errc::profile_not_found.
  const SubscriberProfile& lookup(const std::string& impu) const;
  bool contains(const std::string& impu) const { return profiles_.count(impu) != 0; }
  // Returns false when the impu is not provisioned.
  bool bind(const std::string& impu, const std::string& contact);
  std::size_t size() const noexcept { return profiles_.size(); }
  std::vector<std::string> impus() const;

 private:
  std::map<std::string, SubscriberProfile> profiles_;
};

std::string impu_for(std::string_view user);           // "user0001" -> "sip:user0001@unity"
std::string subscriber_id(std::string_view impu);      // "sip:user0001@unity" -> "user0001"
std::string user_name(int index);                      // 1 -> "user0001"

// Built-in population: user0001..userNNNN, all MMTEL, every tenth with
// ADHOC-CONF.
HssDatabase generate_subscribers(int count);

// One subscriber per line: `impu<TAB>flags`, flags comma-separated.
HssDatabase parse_provisioning(std::string_view text);
std::string format_provisioning(const HssDatabase& db);

}  // namespace unity::ims
