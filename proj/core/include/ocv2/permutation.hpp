#pragma once

#include <span>
#include <vector>

#include "ocv2/item.hpp"
#include "ocv2/rng.hpp"

namespace ocv2 {

/// Bijection on ingredient indices; ingredient i is relabelled to map[i].
class IngredientPermutation {
 public:
  IngredientPermutation() = default;
  /// Throws InvalidArgument unless `mapping` is a bijection on 0..n-1.
  explicit IngredientPermutation(std::vector<int> mapping);

  static IngredientPermutation identity(int n);
  /// Swap two indices, fixing all others.
  static IngredientPermutation swap(int n, int a, int b);

  int size() const { return static_cast<int>(map_.size()); }
  int operator()(int i) const { return map_[static_cast<std::size_t>(i)]; }
  const std::vector<int>& mapping() const { return map_; }
  bool is_identity() const;
  IngredientPermutation inverse() const;

  ItemCode apply(ItemCode item) const;
  Recipe apply(const Recipe& recipe) const;

  friend bool operator==(const IngredientPermutation&, const IngredientPermutation&) = default;

 private:
  std::vector<int> map_;
};

/// One independent uniform draw from `symmetries` per agent.
/// Throws InvalidArgument on an empty symmetry set.
std::vector<IngredientPermutation> draw_permutations(Rng& rng, int n_agents,
                                                     std::span<const IngredientPermutation> symmetries);

}  // namespace ocv2
