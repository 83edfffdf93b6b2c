#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace drought {

// Seven canonical impact categories, fixed alphabetical wire order.
inline constexpr int kNumCategories = 7;
inline constexpr std::array<std::string_view, kNumCategories> kCategoryNames = {
    "agriculture",
    "economy",
    "fire",
    "plants_wildlife",
    "relief_response_restrictions",
    "society_public_health",
    "water_supply_quality",
};

// The nine source categories before the economy aggregation, fixed order.
inline constexpr int kNumRawCategories = 9;
inline constexpr std::array<std::string_view, kNumRawCategories> kRawCategoryNames = {
    "agriculture",
    "energy",
    "plants_wildlife",
    "society_public_health",
    "water_supply_quality",
    "business_industry",
    "fire",
    "relief_response_restrictions",
    "tourism_recreation",
};

struct LabelVector {
  std::array<std::uint8_t, kNumCategories> bits{};

  bool any() const {
    for (auto b : bits)
      if (b) return true;
    return false;
  }
  int count() const {
    int n = 0;
    for (auto b : bits) n += b ? 1 : 0;
    return n;
  }
  bool operator==(const LabelVector&) const = default;
};

struct RawLabelVector9 {
  std::array<std::uint8_t, kNumRawCategories> bits{};
  bool operator==(const RawLabelVector9&) const = default;
};

// Index of a canonical category name, or -1.
int category_index(std::string_view name);
int raw_category_index(std::string_view name);

// economy = energy | business_industry | tourism_recreation; the other six
// categories carry over unchanged.
LabelVector aggregate_labels(const RawLabelVector9& raw);

}  // namespace drought
