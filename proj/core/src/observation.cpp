#include "ocv2/observation.hpp"

#include <algorithm>
#include <cstdlib>

namespace ocv2 {

ObsSchema::ObsSchema(int n) : num_ingredients(n) {
  int off = 0;
  auto add = [&](std::string name, int width, bool indexed = false, int ing_off = 0) {
    groups.push_back({std::move(name), off, width, indexed, ing_off});
    off += width;
  };
  add("static", kNumFixedKinds);
  add("ingredient_piles", n, true, 0);
  add("grid_item", 2 + n, true, 2);
  add("timer", 1);
  add("self_position", 1);
  add("other_positions", 1);
  add("facing", 4);
  add("inventory", 2 + n, true, 2);
  add("recipe_indicator", n, true, 0);
  add("delivery_signal", 1);
  channels = off;
}

const ChannelGroup& ObsSchema::group(std::string_view name) const {
  for (const auto& g : groups) {
    if (g.name == name) return g;
  }
  throw InvalidArgument("unknown channel group '" + std::string(name) + "'");
}

Json ObsSchema::to_json() const {
  Json groups_json = Json::array();
  for (const auto& g : groups) {
    groups_json.push_back(Json{{"name", g.name}, {"offset", g.offset}, {"width", g.width},
                               {"ingredient_indexed", g.ingredient_indexed}});
  }
  return Json{{"version", 1},
              {"num_ingredients", num_ingredients},
              {"channels", channels},
              {"index", "((y * width) + x) * channels + c"},
              {"static_order", {"empty", "wall", "delivery", "pot", "recipe_indicator", "button_recipe_indicator", "plate_pile"}},
              {"facing_order", {"up", "down", "left", "right"}},
              {"groups", std::move(groups_json)}};
}

namespace {

struct Offsets {
  int piles, item, timer, self, others, facing, inventory, recipe, signal, channels;

  explicit Offsets(int n) {
    piles = kNumFixedKinds;
    item = piles + n;
    timer = item + 2 + n;
    self = timer + 1;
    others = self + 1;
    facing = others + 1;
    inventory = facing + 4;
    recipe = inventory + 2 + n;
    signal = recipe + n;
    channels = signal + 1;
  }
};

void write_item(ObsTensor& o, int x, int y, int base, ItemCode item, int n) {
  o.at(x, y, base) = item.plated() ? 1 : 0;
  o.at(x, y, base + 1) = item.cooked() ? 1 : 0;
  for (int i = 0; i < n; ++i) o.at(x, y, base + 2 + i) = item.count(i);
}

}  // namespace

ObsTensor observe_raw(const EnvConfig& config, const GameState& s, int agent) {
  if (agent < 0 || agent >= static_cast<int>(s.agents.size())) {
    throw InvalidArgument("observe: invalid agent index " + std::to_string(agent));
  }
  const int n = config.num_ingredients();
  const Offsets off(n);
  ObsTensor o;
  o.width = s.grid.width;
  o.height = s.grid.height;
  o.channels = off.channels;
  o.data.assign(static_cast<std::size_t>(o.width * o.height * o.channels), 0);

  const bool signal = s.delivered_signal && config.indicate_successful_delivery;
  for (int y = 0; y < o.height; ++y) {
    for (int x = 0; x < o.width; ++x) {
      const std::size_t i = s.grid.index({x, y});
      const StaticCell cell = s.grid.statics[i];
      o.at(x, y, cell.code) = 1;  // piles land in the ingredient_piles group
      const ItemCode item = s.grid.items[i];
      if (!item.empty()) write_item(o, x, y, off.item, item, n);
      o.at(x, y, off.timer) = s.grid.timers[i];
      const bool show_recipe = cell.kind() == CellKind::RecipeIndicator ||
                               (cell.kind() == CellKind::ButtonRecipeIndicator && s.grid.timers[i] > 0);
      if (show_recipe) {
        for (int k = 0; k < n; ++k) o.at(x, y, off.recipe + k) = s.recipe.count(k);
      }
      if (signal) o.at(x, y, off.signal) = 1;
    }
  }
  for (int a = 0; a < static_cast<int>(s.agents.size()); ++a) {
    const AgentState& ag = s.agents[static_cast<std::size_t>(a)];
    const int x = ag.pos.x, y = ag.pos.y;
    o.at(x, y, a == agent ? off.self : off.others) = 1;
    o.at(x, y, off.facing + static_cast<int>(ag.dir)) = 1;
    if (!ag.inventory.empty()) write_item(o, x, y, off.inventory, ag.inventory, n);
  }
  return o;
}

void mask_view(ObsTensor& o, Pos center, int radius) {
  for (int y = 0; y < o.height; ++y) {
    for (int x = 0; x < o.width; ++x) {
      if (std::max(std::abs(x - center.x), std::abs(y - center.y)) <= radius) continue;
      auto first = o.data.begin() + static_cast<std::ptrdiff_t>((y * o.width + x) * o.channels);
      std::fill(first, first + o.channels, 0);
    }
  }
}

ObsTensor permute(const ObsTensor& obs, const IngredientPermutation& phi, const ObsSchema& schema) {
  if (phi.size() != schema.num_ingredients) {
    throw InvalidArgument("permute: permutation arity " + std::to_string(phi.size()) + " != " +
                          std::to_string(schema.num_ingredients));
  }
  if (phi.is_identity()) return obs;
  ObsTensor out = obs;
  const int n = schema.num_ingredients;
  for (int y = 0; y < obs.height; ++y) {
    for (int x = 0; x < obs.width; ++x) {
      for (const auto& g : schema.groups) {
        if (!g.ingredient_indexed) continue;
        const int base = g.offset + g.ingredient_offset;
        for (int i = 0; i < n; ++i) out.at(x, y, base + phi(i)) = obs.at(x, y, base + i);
      }
    }
  }
  return out;
}

ObsTensor observe(const EnvConfig& config, const GameState& s, int agent) {
  ObsTensor o = observe_raw(config, s, agent);
  if (config.view_radius) mask_view(o, s.agents[static_cast<std::size_t>(agent)].pos, *config.view_radius);
  const auto& phi = s.perms[static_cast<std::size_t>(agent)];
  if (phi.is_identity()) return o;
  return permute(o, phi, ObsSchema(config.num_ingredients()));
}

Layout relabel_layout(const Layout& layout, const IngredientPermutation& phi) {
  Layout out = layout;
  for (StaticCell& c : out.cells) {
    if (c.kind() == CellKind::IngredientPile) c = StaticCell::pile(phi(c.ingredient()));
  }
  for (Recipe& r : out.possible_recipes) r = phi.apply(r);
  std::sort(out.possible_recipes.begin(), out.possible_recipes.end());
  return out;
}

GameState relabel_state(const GameState& s, const IngredientPermutation& phi) {
  GameState out = s;
  for (StaticCell& c : out.grid.statics) {
    if (c.kind() == CellKind::IngredientPile) c = StaticCell::pile(phi(c.ingredient()));
  }
  for (ItemCode& it : out.grid.items) it = phi.apply(it);
  for (AgentState& a : out.agents) a.inventory = phi.apply(a.inventory);
  out.recipe = phi.apply(s.recipe);
  return out;
}

bool visible(const EnvConfig& config, const GameState& s, int agent, Pos p) {
  if (!config.view_radius) return true;
  const Pos c = s.agents[static_cast<std::size_t>(agent)].pos;
  return std::max(std::abs(p.x - c.x), std::abs(p.y - c.y)) <= *config.view_radius;
}

}  // namespace ocv2
