#pragma once

#include <array>
#include <string>

#include "afford/error.hpp"

namespace afford {

// Seven action-object relationship categories: positive, firmly negative,
// and five scene-dependent exception types.
enum class Relationship : int {
  kPositive = 0,
  kFirmlyNegative = 1,
  kObjectNonFunctional = 2,
  kPhysicalObstacle = 3,
  kSociallyAwkward = 4,
  kSociallyForbidden = 5,
  kDangerous = 6,
};

inline constexpr int kNumRelationships = 7;

inline constexpr bool is_exception(Relationship r) {
  return static_cast<int>(r) >= 2;
}

inline const std::array<std::string, kNumRelationships>& relationship_names() {
  static const std::array<std::string, kNumRelationships> names = {
      "positive",         "firmly_negative",    "object_non_functional", "physical_obstacle",
      "socially_awkward", "socially_forbidden", "dangerous"};
  return names;
}

inline std::string to_string(Relationship r) {
  return relationship_names()[static_cast<size_t>(r)];
}

inline Relationship relationship_from_string(const std::string& s) {
  const auto& names = relationship_names();
  for (int i = 0; i < kNumRelationships; ++i) {
    if (names[static_cast<size_t>(i)] == s) return static_cast<Relationship>(i);
  }
  throw DataError("unknown relationship label '" + s + "'");
}

}  // namespace afford
