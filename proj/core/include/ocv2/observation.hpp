#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ocv2/env.hpp"
#include "ocv2/serialize.hpp"

namespace ocv2 {

/// One named block of consecutive channels.
struct ChannelGroup {
  std::string name;
  int offset = 0;
  int width = 0;
  bool ingredient_indexed = false;  // permuted by other-play relabelling
  int ingredient_offset = 0;        // first ingredient channel inside the group
};

/// Frozen channel layout for a layout with `num_ingredients` ingredients.
/// Total channel count is 19 + 4 * num_ingredients.
struct ObsSchema {
  int num_ingredients = 0;
  int channels = 0;
  std::vector<ChannelGroup> groups;

  explicit ObsSchema(int num_ingredients);
  const ChannelGroup& group(std::string_view name) const;
  Json to_json() const;
};

/// Dense observation, indexed ((y * width) + x) * channels + c.
struct ObsTensor {
  int width = 0;
  int height = 0;
  int channels = 0;
  std::vector<std::int32_t> data;

  std::int32_t& at(int x, int y, int c) {
    return data[static_cast<std::size_t>((y * width + x) * channels + c)];
  }
  std::int32_t at(int x, int y, int c) const {
    return data[static_cast<std::size_t>((y * width + x) * channels + c)];
  }

  friend bool operator==(const ObsTensor&, const ObsTensor&) = default;
};

/// Builds agent `agent`'s observation: all groups, then view-radius masking,
/// then the agent's own ingredient permutation. Throws InvalidArgument on a
/// bad agent index.
ObsTensor observe(const EnvConfig& config, const GameState& state, int agent);

/// Unpermuted, unmasked observation.
ObsTensor observe_raw(const EnvConfig& config, const GameState& state, int agent);

/// Zeroes every cell at Chebyshev distance > radius from `center`.
void mask_view(ObsTensor& obs, Pos center, int radius);

/// Moves ingredient channel i of every ingredient-indexed group to phi(i).
/// Throws InvalidArgument when phi's arity differs from the schema.
ObsTensor permute(const ObsTensor& obs, const IngredientPermutation& phi, const ObsSchema& schema);

/// Relabels piles, item counts, inventories and the recipe by phi.
GameState relabel_state(const GameState& state, const IngredientPermutation& phi);

/// Layout for relabel_state: same geometry with pile indices permuted.
Layout relabel_layout(const Layout& layout, const IngredientPermutation& phi);

/// True when cell `p` is within `agent`'s view radius (always, when unset).
bool visible(const EnvConfig& config, const GameState& state, int agent, Pos p);

}  // namespace ocv2
