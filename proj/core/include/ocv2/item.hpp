#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "ocv2/types.hpp"

namespace ocv2 {

/// Bit-packed item: bit 0 plated, bit 1 cooked, then two bits of count per
/// ingredient. The same code is used on counters, in pots and in hands.
struct ItemCode {
  std::uint32_t raw = 0;

  static constexpr std::uint32_t kPlated = 1u;
  static constexpr std::uint32_t kCooked = 2u;
  static constexpr int kCountShift = 2;

  constexpr bool empty() const { return raw == 0; }
  constexpr bool plated() const { return (raw & kPlated) != 0; }
  constexpr bool cooked() const { return (raw & kCooked) != 0; }
  constexpr int count(int ingredient) const {
    return static_cast<int>((raw >> (kCountShift + 2 * ingredient)) & 3u);
  }
  constexpr int total() const {
    int sum = 0;
    for (std::uint32_t bits = raw >> kCountShift; bits != 0; bits >>= 2) sum += static_cast<int>(bits & 3u);
    return sum;
  }
  /// A single raw unit of one ingredient, as dispensed by a pile.
  constexpr bool is_raw_ingredient() const { return !plated() && !cooked() && total() >= 1; }
  constexpr bool is_bare_plate() const { return raw == kPlated; }
  constexpr bool is_dish() const { return plated() && cooked(); }

  constexpr ItemCode with_plated() const { return {raw | kPlated}; }
  constexpr ItemCode with_cooked() const { return {raw | kCooked}; }
  constexpr std::uint32_t ingredient_bits() const { return raw >> kCountShift; }

  friend constexpr bool operator==(ItemCode, ItemCode) = default;
};

inline constexpr ItemCode kEmptyItem{0};
inline constexpr ItemCode kPlate{ItemCode::kPlated};

constexpr ItemCode single_ingredient(int ingredient) {
  return {1u << (ItemCode::kCountShift + 2 * ingredient)};
}

struct DecodedItem {
  bool plated = false;
  bool cooked = false;
  std::vector<int> counts;

  friend bool operator==(const DecodedItem&, const DecodedItem&) = default;
};

/// Throws InvalidArgument on a count outside 0..3, a total above 3, more
/// than kMaxIngredients counts, or a cooked item without ingredients.
ItemCode encode_item(bool plated, bool cooked, std::span<const int> counts);

/// Decodes `code` against a layout with `num_ingredients` ingredient types.
/// Throws ParseError for codes that violate the ItemCode invariants or
/// carry bits beyond the last ingredient.
DecodedItem decode_item(ItemCode code, int num_ingredients);

/// True when `code` satisfies every ItemCode invariant for the layout.
bool is_valid_item(ItemCode code, int num_ingredients);

/// Merge ingredient counts of two items (flags from `a`). Caller checks totals.
constexpr ItemCode merge_ingredients(ItemCode a, ItemCode b) {
  return {a.raw + (b.raw & ~(ItemCode::kPlated | ItemCode::kCooked))};
}

/// Recipes always contain exactly three ingredients, stored as counts.
class Recipe {
 public:
  Recipe() = default;
  /// From per-ingredient counts; sum must be 3.
  static Recipe from_counts(std::span<const int> counts);
  /// From a list of three ingredient indices, e.g. {0, 0, 1}.
  static Recipe from_ingredients(std::span<const int> ingredients);

  int count(int ingredient) const { return counts_[static_cast<std::size_t>(ingredient)]; }
  const std::array<std::uint8_t, kMaxIngredients>& counts() const { return counts_; }
  /// Sorted ingredient indices, e.g. {0, 0, 1}.
  std::array<int, 3> ingredients() const;
  /// Uncooked, unplated ItemCode with this recipe's counts.
  ItemCode contents() const;
  ItemCode dish() const { return contents().with_cooked().with_plated(); }
  std::string to_string() const;

  friend bool operator==(const Recipe&, const Recipe&) = default;
  /// Lexicographic on the sorted ingredient list: 0,0,0 < 0,0,1 < 0,1,1.
  friend auto operator<=>(const Recipe& a, const Recipe& b) { return a.ingredients() <=> b.ingredients(); }

 private:
  std::array<std::uint8_t, kMaxIngredients> counts_{};
};

/// Plated, cooked and ingredient counts equal to the recipe.
bool matches_recipe(ItemCode item, const Recipe& recipe);

/// Every count of `item` is at most the recipe's count.
bool is_sub_multiset(ItemCode item, const Recipe& recipe);

/// All multisets of size 3 over `ingredients`, in lexicographic order.
std::vector<Recipe> enumerate_recipes(std::span<const int> ingredients);

}  // namespace ocv2
