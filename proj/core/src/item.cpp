#include "ocv2/item.hpp"

#include <numeric>
#include <sstream>

namespace ocv2 {

ItemCode encode_item(bool plated, bool cooked, std::span<const int> counts) {
  if (counts.size() > static_cast<std::size_t>(kMaxIngredients)) {
    throw InvalidArgument("encode_item: more than " + std::to_string(kMaxIngredients) + " ingredients");
  }
  std::uint32_t raw = (plated ? ItemCode::kPlated : 0u) | (cooked ? ItemCode::kCooked : 0u);
  int total = 0;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    const int c = counts[i];
    if (c < 0 || c > 3) {
      throw InvalidArgument("encode_item: count " + std::to_string(c) + " for ingredient " + std::to_string(i) +
                            " outside 0..3");
    }
    total += c;
    raw |= static_cast<std::uint32_t>(c) << (ItemCode::kCountShift + 2 * i);
  }
  if (total > 3) throw InvalidArgument("encode_item: total ingredient count " + std::to_string(total) + " > 3");
  if (cooked && total == 0) throw InvalidArgument("encode_item: cooked item without ingredients");
  return {raw};
}

bool is_valid_item(ItemCode code, int num_ingredients) {
  if (num_ingredients < 0 || num_ingredients > kMaxIngredients) return false;
  const int used_bits = ItemCode::kCountShift + 2 * num_ingredients;
  if ((code.raw >> used_bits) != 0) return false;
  const int total = code.total();
  if (total > 3) return false;
  if (code.cooked() && total == 0) return false;
  return true;
}

DecodedItem decode_item(ItemCode code, int num_ingredients) {
  if (!is_valid_item(code, num_ingredients)) {
    throw ParseError("decode_item: invalid item code " + std::to_string(code.raw) + " for " +
                     std::to_string(num_ingredients) + " ingredients");
  }
  DecodedItem out;
  out.plated = code.plated();
  out.cooked = code.cooked();
  out.counts.resize(static_cast<std::size_t>(num_ingredients));
  for (int i = 0; i < num_ingredients; ++i) out.counts[static_cast<std::size_t>(i)] = code.count(i);
  return out;
}

Recipe Recipe::from_counts(std::span<const int> counts) {
  if (counts.size() > static_cast<std::size_t>(kMaxIngredients)) throw InvalidArgument("recipe: too many ingredients");
  Recipe r;
  int total = 0;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    if (counts[i] < 0 || counts[i] > 3) throw InvalidArgument("recipe: count outside 0..3");
    r.counts_[i] = static_cast<std::uint8_t>(counts[i]);
    total += counts[i];
  }
  if (total != 3) throw InvalidArgument("recipe: counts must sum to 3, got " + std::to_string(total));
  return r;
}

Recipe Recipe::from_ingredients(std::span<const int> ingredients) {
  if (ingredients.size() != 3) throw InvalidArgument("recipe: exactly three ingredients required");
  Recipe r;
  for (int i : ingredients) {
    if (i < 0 || i >= kMaxIngredients) throw InvalidArgument("recipe: ingredient index out of range");
    ++r.counts_[static_cast<std::size_t>(i)];
  }
  return r;
}

std::array<int, 3> Recipe::ingredients() const {
  std::array<int, 3> out{};
  std::size_t k = 0;
  for (int i = 0; i < kMaxIngredients; ++i) {
    for (int c = 0; c < counts_[static_cast<std::size_t>(i)]; ++c) out[k++] = i;
  }
  return out;
}

ItemCode Recipe::contents() const {
  std::uint32_t raw = 0;
  for (int i = 0; i < kMaxIngredients; ++i) {
    raw |= static_cast<std::uint32_t>(counts_[static_cast<std::size_t>(i)]) << (ItemCode::kCountShift + 2 * i);
  }
  return {raw};
}

std::string Recipe::to_string() const {
  const auto ing = ingredients();
  std::ostringstream os;
  os << ing[0] << ',' << ing[1] << ',' << ing[2];
  return os.str();
}

bool matches_recipe(ItemCode item, const Recipe& recipe) {
  return item.plated() && item.cooked() && item.ingredient_bits() == recipe.contents().ingredient_bits();
}

bool is_sub_multiset(ItemCode item, const Recipe& recipe) {
  for (int i = 0; i < kMaxIngredients; ++i) {
    if (item.count(i) > recipe.count(i)) return false;
  }
  return true;
}

std::vector<Recipe> enumerate_recipes(std::span<const int> ingredients) {
  std::vector<Recipe> out;
  const std::size_t n = ingredients.size();
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = a; b < n; ++b) {
      for (std::size_t c = b; c < n; ++c) {
        const std::array<int, 3> ing = {ingredients[a], ingredients[b], ingredients[c]};
        out.push_back(Recipe::from_ingredients(ing));
      }
    }
  }
  return out;
}

}  // namespace ocv2
