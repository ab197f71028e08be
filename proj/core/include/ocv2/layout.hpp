#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "ocv2/item.hpp"
#include "ocv2/types.hpp"

namespace ocv2 {

enum class CellKind : std::uint8_t {
  Empty = 0,
  Wall = 1,
  Delivery = 2,
  Pot = 3,
  RecipeIndicator = 4,
  ButtonRecipeIndicator = 5,
  PlatePile = 6,
  IngredientPile = 7,
};

inline constexpr int kNumFixedKinds = 7;

/// Static (layer 0) cell. Packed as one byte: kinds 0..6 directly, piles as
/// 7 + ingredient index, which is also the observation channel offset.
struct StaticCell {
  std::uint8_t code = 0;

  static constexpr StaticCell of(CellKind k) { return {static_cast<std::uint8_t>(k)}; }
  static constexpr StaticCell pile(int ingredient) {
    return {static_cast<std::uint8_t>(kNumFixedKinds + ingredient)};
  }

  constexpr CellKind kind() const {
    return code >= kNumFixedKinds ? CellKind::IngredientPile : static_cast<CellKind>(code);
  }
  constexpr int ingredient() const { return code >= kNumFixedKinds ? code - kNumFixedKinds : -1; }
  constexpr bool walkable() const { return code == 0; }

  friend constexpr bool operator==(StaticCell, StaticCell) = default;
};

/// DSL character for a static cell ('A' spawns are stored separately).
char glyph(StaticCell cell);

struct Layout {
  std::string name;
  int width = 0;
  int height = 0;
  std::vector<StaticCell> cells;  // row-major, width * height
  std::vector<Pos> spawns;        // row-major scan order of 'A'
  int num_ingredients = 0;        // highest pile index + 1
  std::vector<Recipe> possible_recipes;

  StaticCell at(Pos p) const { return cells[static_cast<std::size_t>(p.y * width + p.x)]; }
  bool in_bounds(Pos p) const { return p.x >= 0 && p.y >= 0 && p.x < width && p.y < height; }
  int index(Pos p) const { return p.y * width + p.x; }
  Pos pos_of(int index) const { return {index % width, index / width}; }
  int num_agents() const { return static_cast<int>(spawns.size()); }
  /// Ingredient indices that have a pile, ascending.
  std::vector<int> present_ingredients() const;

  friend bool operator==(const Layout&, const Layout&) = default;
};

using LayoutPtr = std::shared_ptr<const Layout>;

/// Parses the layout DSL: grid lines, then an optional blank line followed by
/// `key=value` directives (`recipes=0,0,1;0,1,1`, `name=...`). Leading blank
/// lines are skipped and ragged rows are right-padded with spaces.
/// Throws ParseError with row/column context.
Layout parse_layout(std::string_view text, std::string name = {});

/// Canonical DSL text. The recipes directive is written only when the
/// recipe set differs from the default enumeration.
std::string serialize_layout(const Layout& layout);

/// Reads and parses a `.layout` file; the file stem becomes the default name.
Layout load_layout_file(const std::string& path);

/// Built-in registry lookup. Throws InvalidArgument listing known names.
const Layout& builtin(std::string_view name);
LayoutPtr builtin_ptr(std::string_view name);
const std::vector<std::string>& builtin_names();

/// Resolves a registry name or a path to a `.layout` file.
LayoutPtr resolve_layout(std::string_view name_or_path);

/// Floor cells reachable from `start` (inclusive) by 4-connected moves.
std::vector<Pos> reachable_floor(const Layout& layout, Pos start);

/// Human-readable reachability and consistency issues; empty means valid.
std::vector<std::string> validate(const Layout& layout);

}  // namespace ocv2
