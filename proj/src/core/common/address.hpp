#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace unity {

using PouchId = std::uint32_t;
using InstanceId = std::uint64_t;

enum class UnitType { SIPh, NssAgent, H, Diah, C, A, T, M };

inline constexpr UnitType kAllUnitTypes[] = {UnitType::SIPh, UnitType::NssAgent, UnitType::H, UnitType::Diah,
                                            UnitType::C,    UnitType::A,        UnitType::T, UnitType::M};

std::string_view unit_type_name(UnitType t) noexcept;
// Accepts the descriptor spellings (SIPh, NSS, H, Diah, C, A, T, M).
std::optional<UnitType> unit_type_from_name(std::string_view name) noexcept;

struct UnitAddress {
  UnitType type = UnitType::SIPh;
  InstanceId instance = 0;
  PouchId pouch = 0;

  bool valid() const noexcept { return instance != 0; }
  friend bool operator==(const UnitAddress&, const UnitAddress&) = default;
  friend auto operator<=>(const UnitAddress&, const UnitAddress&) = default;
};

std::string to_string(const UnitAddress& a);

}  // namespace unity
