#include "common/address.hpp"

namespace unity {

std::string_view unit_type_name(UnitType t) noexcept {
  switch (t) {
    case UnitType::SIPh: return "SIPh";
    case UnitType::NssAgent: return "NSS";
    case UnitType::H: return "H";
    case UnitType::Diah: return "Diah";
    case UnitType::C: return "C";
    case UnitType::A: return "A";
    case UnitType::T: return "T";
    case UnitType::M: return "M";
  }
  return "?";
}

std::optional<UnitType> unit_type_from_name(std::string_view name) noexcept {
  for (UnitType t : kAllUnitTypes) {
    if (name == unit_type_name(t)) return t;
  }
  if (name == "NSS-agent") return UnitType::NssAgent;
  return std::nullopt;
}

std::string to_string(const UnitAddress& a) {
  return std::string(unit_type_name(a.type)) + "#" + std::to_string(a.instance) + "@p" + std::to_string(a.pouch);
}

}  // namespace unity
