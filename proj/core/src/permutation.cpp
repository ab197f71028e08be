#include "ocv2/permutation.hpp"

#include <numeric>
#include <string>

namespace ocv2 {

IngredientPermutation::IngredientPermutation(std::vector<int> mapping) : map_(std::move(mapping)) {
  std::vector<bool> seen(map_.size(), false);
  for (int v : map_) {
    if (v < 0 || static_cast<std::size_t>(v) >= map_.size() || seen[static_cast<std::size_t>(v)]) {
      throw InvalidArgument("ingredient permutation is not a bijection");
    }
    seen[static_cast<std::size_t>(v)] = true;
  }
}

IngredientPermutation IngredientPermutation::identity(int n) {
  std::vector<int> m(static_cast<std::size_t>(n));
  std::iota(m.begin(), m.end(), 0);
  return IngredientPermutation(std::move(m));
}

IngredientPermutation IngredientPermutation::swap(int n, int a, int b) {
  auto p = identity(n);
  if (a < 0 || b < 0 || a >= n || b >= n) throw InvalidArgument("swap index out of range");
  std::swap(p.map_[static_cast<std::size_t>(a)], p.map_[static_cast<std::size_t>(b)]);
  return p;
}

bool IngredientPermutation::is_identity() const {
  for (std::size_t i = 0; i < map_.size(); ++i) {
    if (map_[i] != static_cast<int>(i)) return false;
  }
  return true;
}

IngredientPermutation IngredientPermutation::inverse() const {
  std::vector<int> inv(map_.size());
  for (std::size_t i = 0; i < map_.size(); ++i) inv[static_cast<std::size_t>(map_[i])] = static_cast<int>(i);
  return IngredientPermutation(std::move(inv));
}

ItemCode IngredientPermutation::apply(ItemCode item) const {
  std::uint32_t raw = item.raw & (ItemCode::kPlated | ItemCode::kCooked);
  for (std::size_t i = 0; i < map_.size(); ++i) {
    raw |= static_cast<std::uint32_t>(item.count(static_cast<int>(i))) << (ItemCode::kCountShift + 2 * map_[i]);
  }
  return {raw};
}

Recipe IngredientPermutation::apply(const Recipe& recipe) const {
  std::array<int, 3> ing = recipe.ingredients();
  for (int& i : ing) {
    if (i < size()) i = map_[static_cast<std::size_t>(i)];
  }
  return Recipe::from_ingredients(ing);
}

std::vector<IngredientPermutation> draw_permutations(Rng& rng, int n_agents,
                                                     std::span<const IngredientPermutation> symmetries) {
  if (symmetries.empty()) throw InvalidArgument("draw_permutations: empty symmetry set");
  std::vector<IngredientPermutation> out;
  out.reserve(static_cast<std::size_t>(n_agents));
  for (int a = 0; a < n_agents; ++a) out.push_back(symmetries[rng.below(symmetries.size())]);
  return out;
}

}  // namespace ocv2
