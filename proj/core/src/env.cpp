#include "ocv2/env.hpp"

#include <algorithm>
#include <numeric>
#include <string>

namespace ocv2 {

void EnvConfig::check() const {
  if (!layout) throw InvalidArgument("EnvConfig: layout is not set");
  if (view_radius && *view_radius < 0) throw InvalidArgument("EnvConfig: view_radius must be >= 0");
  if (cook_time < 1) throw InvalidArgument("EnvConfig: cook_time must be >= 1");
  if (max_steps < 1) throw InvalidArgument("EnvConfig: max_steps must be >= 1");
  if (button_duration < 0) throw InvalidArgument("EnvConfig: button_duration must be >= 0");
  for (const auto& p : other_play_symmetries) {
    if (p.size() != layout->num_ingredients) {
      throw InvalidArgument("EnvConfig: symmetry arity " + std::to_string(p.size()) + " != " +
                            std::to_string(layout->num_ingredients) + " ingredients");
    }
  }
}

namespace {

Grid empty_grid(const Layout& layout) {
  Grid g;
  g.width = layout.width;
  g.height = layout.height;
  g.statics = layout.cells;
  g.items.assign(layout.cells.size(), kEmptyItem);
  g.timers.assign(layout.cells.size(), 0);
  return g;
}

std::vector<IngredientPermutation> identity_perms(int agents, int ingredients) {
  return std::vector<IngredientPermutation>(static_cast<std::size_t>(agents),
                                            IngredientPermutation::identity(ingredients));
}

bool pot_matches_recipe_in_progress(const GameState& s) {
  const std::uint32_t want = s.recipe.contents().ingredient_bits();
  for (std::size_t i = 0; i < s.grid.statics.size(); ++i) {
    if (s.grid.statics[i].kind() != CellKind::Pot) continue;
    const ItemCode item = s.grid.items[i];
    if (item.ingredient_bits() != want) continue;
    if (s.grid.timers[i] > 0 || item.cooked()) return true;
  }
  return false;
}

}  // namespace

GameState reset(const EnvConfig& config, std::uint64_t seed) {
  config.check();
  const Layout& layout = *config.layout;
  GameState s;
  s.rng = Rng(seed);
  s.grid = empty_grid(layout);
  s.recipe = layout.possible_recipes[s.rng.below(layout.possible_recipes.size())];

  const int n = layout.num_agents();
  s.agents.resize(static_cast<std::size_t>(n));
  if (!config.random_agent_positions) {
    for (int a = 0; a < n; ++a) s.agents[static_cast<std::size_t>(a)] = {layout.spawns[static_cast<std::size_t>(a)], Dir::Up, kEmptyItem};
  } else {
    std::vector<bool> taken(layout.cells.size(), false);
    for (int a = 0; a < n; ++a) {
      std::vector<Pos> candidates = reachable_floor(layout, layout.spawns[static_cast<std::size_t>(a)]);
      std::erase_if(candidates, [&](Pos p) { return taken[static_cast<std::size_t>(layout.index(p))]; });
      if (candidates.empty()) {
        throw InvalidArgument("reset: layout '" + layout.name + "' has fewer reachable floor cells than agents");
      }
      const Pos p = candidates[s.rng.below(candidates.size())];
      taken[static_cast<std::size_t>(layout.index(p))] = true;
      s.agents[static_cast<std::size_t>(a)] = {p, static_cast<Dir>(s.rng.below(4)), kEmptyItem};
    }
  }

  if (config.other_play_symmetries.empty()) {
    s.perms = identity_perms(n, layout.num_ingredients);
  } else {
    s.perms = draw_permutations(s.rng, n, config.other_play_symmetries);
  }
  return s;
}

void check_state(const EnvConfig& config, const GameState& s) {
  config.check();
  const Layout& layout = *config.layout;
  const Grid& g = s.grid;
  if (g.width != layout.width || g.height != layout.height) throw InvalidArgument("state: grid shape differs from layout");
  const std::size_t cells = layout.cells.size();
  if (g.statics.size() != cells || g.items.size() != cells || g.timers.size() != cells) {
    throw InvalidArgument("state: grid layer sizes differ from layout");
  }
  if (g.statics != layout.cells) throw InvalidArgument("state: static layer differs from layout");
  for (std::size_t i = 0; i < cells; ++i) {
    const CellKind k = g.statics[i].kind();
    if (!is_valid_item(g.items[i], layout.num_ingredients)) {
      throw InvalidArgument("state: invalid item code " + std::to_string(g.items[i].raw) + " at cell " + std::to_string(i));
    }
    if (!g.items[i].empty() && k != CellKind::Wall && k != CellKind::Pot) {
      throw InvalidArgument("state: item on a cell that cannot hold items (cell " + std::to_string(i) + ")");
    }
    if (g.timers[i] < 0) throw InvalidArgument("state: negative timer");
    if (g.timers[i] != 0 && k != CellKind::Pot && k != CellKind::ButtonRecipeIndicator) {
      throw InvalidArgument("state: timer on a cell without one (cell " + std::to_string(i) + ")");
    }
  }
  if (s.agents.size() != layout.spawns.size()) throw InvalidArgument("state: agent count differs from layout");
  for (std::size_t a = 0; a < s.agents.size(); ++a) {
    const AgentState& ag = s.agents[a];
    if (!layout.in_bounds(ag.pos) || !layout.at(ag.pos).walkable()) {
      throw InvalidArgument("state: agent " + std::to_string(a) + " is not on a floor cell");
    }
    if (!is_valid_item(ag.inventory, layout.num_ingredients)) {
      throw InvalidArgument("state: agent " + std::to_string(a) + " holds an invalid item");
    }
    if (static_cast<int>(ag.dir) > 3) throw InvalidArgument("state: bad direction");
    for (std::size_t b = 0; b < a; ++b) {
      if (s.agents[b].pos == ag.pos) {
        throw InvalidArgument("state: agents " + std::to_string(b) + " and " + std::to_string(a) + " share a cell");
      }
    }
  }
  if (std::find(layout.possible_recipes.begin(), layout.possible_recipes.end(), s.recipe) ==
      layout.possible_recipes.end()) {
    throw InvalidArgument("state: recipe " + s.recipe.to_string() + " is not a possible recipe of the layout");
  }
  if (s.perms.size() != s.agents.size()) throw InvalidArgument("state: one permutation per agent required");
  for (const auto& p : s.perms) {
    if (p.size() != layout.num_ingredients) throw InvalidArgument("state: permutation arity mismatch");
  }
  if (s.t < 0 || s.t > config.max_steps) throw InvalidArgument("state: t outside 0..max_steps");
}

GameState reset_to(const EnvConfig& config, GameState state) {
  check_state(config, state);
  state.t = 0;
  return state;
}

ProposedMoves move_agents(const GameState& state, std::span<const Action> actions) {
  ProposedMoves out;
  out.positions.reserve(state.agents.size());
  out.dirs.reserve(state.agents.size());
  for (std::size_t a = 0; a < state.agents.size(); ++a) {
    const AgentState& ag = state.agents[a];
    Pos pos = ag.pos;
    Dir dir = ag.dir;
    if (const auto d = move_dir(actions[a])) {
      dir = *d;
      const Pos target = ag.pos + delta(*d);
      if (state.grid.in_bounds(target) && state.grid.statics[state.grid.index(target)].walkable()) pos = target;
    }
    out.positions.push_back(pos);
    out.dirs.push_back(dir);
  }
  return out;
}

CollisionResolution resolve_collisions(std::span<const Pos> proposed, std::span<const Pos> previous) {
  const std::size_t n = proposed.size();
  CollisionResolution res;
  res.positions.assign(proposed.begin(), proposed.end());
  std::vector<std::size_t> order(n);
  std::vector<bool> involved(n);
  auto before = [&](std::size_t a, std::size_t b) {
    const Pos pa = res.positions[a], pb = res.positions[b];
    return pa.y != pb.y ? pa.y < pb.y : pa.x < pb.x;
  };
  for (;;) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), before);
    std::fill(involved.begin(), involved.end(), false);
    bool any = false;
    for (std::size_t k = 1; k < n; ++k) {
      if (res.positions[order[k]] == res.positions[order[k - 1]]) {
        involved[order[k]] = involved[order[k - 1]] = true;
        any = true;
      }
    }
    if (!any) break;
    ++res.iterations;
    for (std::size_t a = 0; a < n; ++a) {
      if (involved[a]) res.positions[a] = previous[a];
    }
  }
  // Swap rejection on the collision-free result.
  std::vector<bool> swapped(n, false);
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = a + 1; b < n; ++b) {
      if (res.positions[a] == previous[b] && res.positions[b] == previous[a] && !(previous[a] == previous[b])) {
        swapped[a] = swapped[b] = true;
      }
    }
  }
  for (std::size_t a = 0; a < n; ++a) {
    if (swapped[a]) res.positions[a] = previous[a];
  }
  return res;
}

InteractionResult process_interaction(const EnvConfig& config, GameState& s, int agent) {
  InteractionResult out;
  AgentState& ag = s.agents[static_cast<std::size_t>(agent)];
  const Pos target = ag.pos + delta(ag.dir);
  if (!s.grid.in_bounds(target)) return out;
  const std::size_t cell = s.grid.index(target);
  const StaticCell stat = s.grid.statics[cell];
  ItemCode& here = s.grid.items[cell];
  std::int32_t& timer = s.grid.timers[cell];
  ItemCode& hand = ag.inventory;

  switch (stat.kind()) {
    case CellKind::IngredientPile:
      if (hand.empty()) {
        hand = single_ingredient(stat.ingredient());
        out.events.emplace_back(event::PickedUp{agent, target, hand});
      }
      break;

    case CellKind::PlatePile:
      if (hand.empty()) {
        hand = kPlate;
        if (pot_matches_recipe_in_progress(s)) out.shaped += config.shaped_rewards.plate_pickup;
        out.events.emplace_back(event::PickedUp{agent, target, hand});
      }
      break;

    case CellKind::Pot: {
      const bool idle = timer == 0 && !here.cooked();
      if (hand.is_raw_ingredient() && idle && here.total() + hand.total() <= 3) {
        here = merge_ingredients(here, hand);
        out.events.emplace_back(event::Placed{agent, target, hand});
        hand = kEmptyItem;
        if (is_sub_multiset(here, s.recipe)) out.shaped += config.shaped_rewards.pot_placement;
      } else if (hand.is_bare_plate() && here.cooked() && timer == 0) {
        hand = here.with_plated();
        here = kEmptyItem;
        if (matches_recipe(hand, s.recipe)) out.shaped += config.shaped_rewards.dish_pickup;
        out.events.emplace_back(event::PickedUp{agent, target, hand});
      } else if (hand.empty() && !config.auto_start_cooking && idle && here.total() == 3) {
        timer = config.cook_time;
        out.events.emplace_back(event::CookingStarted{target});
      }
      break;
    }

    case CellKind::Wall:
      if (here.empty() && !hand.empty()) {
        here = hand;
        out.events.emplace_back(event::Placed{agent, target, hand});
        hand = kEmptyItem;
      } else if (!here.empty() && hand.empty()) {
        hand = here;
        here = kEmptyItem;
        out.events.emplace_back(event::PickedUp{agent, target, hand});
      }
      break;

    case CellKind::Delivery:
      if (hand.is_dish()) {
        const bool correct = matches_recipe(hand, s.recipe);
        out.events.emplace_back(event::Delivered{agent, correct, s.recipe, hand});
        hand = kEmptyItem;
        if (correct) {
          out.reward += 20.0;
          if (config.indicate_successful_delivery) s.delivered_signal = true;
          if (config.sample_recipe_on_delivery) {
            const auto& recipes = config.layout->possible_recipes;
            s.recipe = recipes[s.rng.below(recipes.size())];
          }
        } else if (config.negative_rewards) {
          out.reward -= 20.0;
        }
      }
      break;

    case CellKind::ButtonRecipeIndicator:
      timer = config.button_duration;
      out.reward += config.button_cost;
      out.events.emplace_back(event::ButtonPressed{agent, target});
      break;

    case CellKind::Empty:
    case CellKind::RecipeIndicator:
      break;
  }
  return out;
}

void update_globals(const EnvConfig& config, GameState& s, std::span<const std::size_t> fresh) {
  s.t += 1;
  Grid& g = s.grid;
  for (std::size_t i = 0; i < g.timers.size(); ++i) {
    if (g.timers[i] <= 0) continue;
    if (std::find(fresh.begin(), fresh.end(), i) != fresh.end()) continue;
    if (--g.timers[i] == 0 && g.statics[i].kind() == CellKind::Pot) g.items[i] = g.items[i].with_cooked();
  }
  if (config.auto_start_cooking) {
    for (std::size_t i = 0; i < g.statics.size(); ++i) {
      if (g.statics[i].kind() != CellKind::Pot) continue;
      const ItemCode item = g.items[i];
      if (g.timers[i] == 0 && !item.cooked() && !item.plated() && item.total() == 3) g.timers[i] = config.cook_time;
    }
  }
}

StepOutcome step_inplace(const EnvConfig& config, GameState& s, std::span<const Action> actions) {
  const std::size_t n = s.agents.size();
  if (actions.size() != n) {
    throw InvalidArgument("step: expected " + std::to_string(n) + " actions, got " + std::to_string(actions.size()));
  }
  if (s.t >= config.max_steps) throw InvalidArgument("step: episode is done (t == max_steps)");

  s.delivered_signal = false;
  ProposedMoves moves = move_agents(s, actions);
  std::vector<Pos> previous(n);
  for (std::size_t a = 0; a < n; ++a) previous[a] = s.agents[a].pos;
  const CollisionResolution resolved = resolve_collisions(moves.positions, previous);
  for (std::size_t a = 0; a < n; ++a) {
    s.agents[a].pos = resolved.positions[a];
    s.agents[a].dir = moves.dirs[a];
  }

  StepOutcome out;
  out.shaped.assign(n, 0.0);
  double reward = 0.0;
  std::vector<std::size_t> fresh;
  for (std::size_t a = 0; a < n; ++a) {
    if (actions[a] != Action::Interact) continue;
    InteractionResult r = process_interaction(config, s, static_cast<int>(a));
    reward += r.reward;
    out.shaped[a] += r.shaped;
    for (Event& e : r.events) {
      if (const auto* c = std::get_if<event::CookingStarted>(&e)) fresh.push_back(s.grid.index(c->pos));
      if (const auto* b = std::get_if<event::ButtonPressed>(&e)) fresh.push_back(s.grid.index(b->pos));
      out.events.push_back(std::move(e));
    }
  }
  update_globals(config, s, fresh);
  out.rewards.assign(n, reward);
  out.done = s.t >= config.max_steps;
  return out;
}

std::pair<GameState, StepOutcome> step(const EnvConfig& config, const GameState& state,
                                       std::span<const Action> actions) {
  GameState next = state;
  StepOutcome out = step_inplace(config, next, actions);
  return {std::move(next), std::move(out)};
}

namespace {

struct Fnv64 {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  void byte(std::uint8_t b) {
    h ^= b;
    h *= 0x100000001b3ULL;
  }
  void u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) byte(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void i64(std::int64_t v) { u64(static_cast<std::uint64_t>(v)); }
};

}  // namespace

std::uint64_t state_hash(const GameState& s) {
  Fnv64 f;
  f.i64(s.grid.width);
  f.i64(s.grid.height);
  for (StaticCell c : s.grid.statics) f.byte(c.code);
  for (ItemCode it : s.grid.items) f.u64(it.raw);
  for (std::int32_t t : s.grid.timers) f.i64(t);
  f.u64(s.agents.size());
  for (const AgentState& a : s.agents) {
    f.i64(a.pos.x);
    f.i64(a.pos.y);
    f.byte(static_cast<std::uint8_t>(a.dir));
    f.u64(a.inventory.raw);
  }
  f.i64(s.t);
  for (std::uint8_t c : s.recipe.counts()) f.byte(c);
  for (const auto& p : s.perms) {
    f.u64(p.mapping().size());
    for (int v : p.mapping()) f.i64(v);
  }
  f.byte(s.delivered_signal ? 1 : 0);
  f.u64(s.rng.key());
  f.u64(s.rng.counter());
  return f.h;
}

}  // namespace ocv2
