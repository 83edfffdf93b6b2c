#include "drought/labels.hpp"

namespace drought {

int category_index(std::string_view name) {
  for (int i = 0; i < kNumCategories; ++i)
    if (kCategoryNames[i] == name) return i;
  return -1;
}

int raw_category_index(std::string_view name) {
  for (int i = 0; i < kNumRawCategories; ++i)
    if (kRawCategoryNames[i] == name) return i;
  return -1;
}

LabelVector aggregate_labels(const RawLabelVector9& raw) {
  auto r = [&](std::string_view name) {
    return raw.bits[static_cast<std::size_t>(raw_category_index(name))];
  };
  LabelVector out;
  out.bits[0] = r("agriculture");
  out.bits[1] = (r("energy") || r("business_industry") || r("tourism_recreation")) ? 1 : 0;
  out.bits[2] = r("fire");
  out.bits[3] = r("plants_wildlife");
  out.bits[4] = r("relief_response_restrictions");
  out.bits[5] = r("society_public_health");
  out.bits[6] = r("water_supply_quality");
  return out;
}

}  // namespace drought
