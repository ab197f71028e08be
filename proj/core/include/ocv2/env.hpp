#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "ocv2/item.hpp"
#include "ocv2/layout.hpp"
#include "ocv2/permutation.hpp"
#include "ocv2/rng.hpp"
#include "ocv2/types.hpp"

namespace ocv2 {

struct ShapedRewards {
  double pot_placement = 3.0;
  double plate_pickup = 3.0;
  double dish_pickup = 5.0;

  friend bool operator==(const ShapedRewards&, const ShapedRewards&) = default;
};

struct EnvConfig {
  LayoutPtr layout;
  std::optional<int> view_radius;  // nullopt = full observability
  bool random_agent_positions = false;
  bool negative_rewards = false;
  bool sample_recipe_on_delivery = false;
  bool indicate_successful_delivery = false;
  bool auto_start_cooking = true;
  int cook_time = 20;
  int button_duration = 10;
  double button_cost = -2.0;
  int max_steps = 400;
  ShapedRewards shaped_rewards;
  /// Ingredient permutations drawn per agent at reset (other-play).
  std::vector<IngredientPermutation> other_play_symmetries;

  /// Throws InvalidArgument on a missing layout or an out-of-range field.
  void check() const;
  int num_agents() const { return layout->num_agents(); }
  int num_ingredients() const { return layout->num_ingredients; }
};

/// Three grid layers: static cells, item codes, timers.
struct Grid {
  int width = 0;
  int height = 0;
  std::vector<StaticCell> statics;
  std::vector<ItemCode> items;
  std::vector<std::int32_t> timers;

  std::size_t index(Pos p) const { return static_cast<std::size_t>(p.y * width + p.x); }
  bool in_bounds(Pos p) const { return p.x >= 0 && p.y >= 0 && p.x < width && p.y < height; }

  friend bool operator==(const Grid&, const Grid&) = default;
};

struct AgentState {
  Pos pos;
  Dir dir = Dir::Up;
  ItemCode inventory;

  friend bool operator==(const AgentState&, const AgentState&) = default;
};

struct GameState {
  Grid grid;
  std::vector<AgentState> agents;
  int t = 0;
  Recipe recipe;
  std::vector<IngredientPermutation> perms;
  bool delivered_signal = false;
  Rng rng;

  friend bool operator==(const GameState&, const GameState&) = default;
};

namespace event {
struct Delivered {
  int agent;
  bool correct;
  Recipe recipe;
  ItemCode dish;
};
struct CookingStarted {
  Pos pos;
};
struct ButtonPressed {
  int agent;
  Pos pos;
};
struct Placed {
  int agent;
  Pos pos;
  ItemCode item;
};
struct PickedUp {
  int agent;
  Pos pos;
  ItemCode item;
};
}  // namespace event

using Event = std::variant<event::Delivered, event::CookingStarted, event::ButtonPressed, event::Placed,
                           event::PickedUp>;

struct StepOutcome {
  std::vector<double> rewards;  // common payoff, identical entries
  std::vector<double> shaped;   // per agent
  bool done = false;
  std::vector<Event> events;
};

struct InteractionResult {
  double reward = 0.0;
  double shaped = 0.0;
  std::vector<Event> events;
};

GameState reset(const EnvConfig& config, std::uint64_t seed);

/// Injects `state` as a start state: validates it against the layout and
/// returns it with t = 0.
GameState reset_to(const EnvConfig& config, GameState state);

/// Throws InvalidArgument describing the first invariant violation.
void check_state(const EnvConfig& config, const GameState& state);

/// Pure transition: move_agents, resolve_collisions, process_interaction in
/// agent order, then update_globals.
std::pair<GameState, StepOutcome> step(const EnvConfig& config, const GameState& state,
                                       std::span<const Action> actions);

/// In-place variant of `step` used on hot paths.
StepOutcome step_inplace(const EnvConfig& config, GameState& state, std::span<const Action> actions);

struct ProposedMoves {
  std::vector<Pos> positions;
  std::vector<Dir> dirs;
};

/// Collision-free proposals: a move into a non-floor cell keeps the position
/// but still turns the agent.
ProposedMoves move_agents(const GameState& state, std::span<const Action> actions);

struct CollisionResolution {
  std::vector<Pos> positions;
  int iterations = 0;  // collision passes that reset at least one agent
};

/// Iteratively resets every agent involved in a shared cell to its previous
/// position until none remain, then resets swapped pairs.
CollisionResolution resolve_collisions(std::span<const Pos> proposed, std::span<const Pos> previous);

/// Applies agent `agent`'s Interact to `state` in place.
InteractionResult process_interaction(const EnvConfig& config, GameState& state, int agent);

/// Global per-tick updates. Timers at cells listed in `fresh` were set during
/// this tick and are not decremented.
void update_globals(const EnvConfig& config, GameState& state, std::span<const std::size_t> fresh = {});

/// 64-bit FNV-1a over every field of the state.
std::uint64_t state_hash(const GameState& state);

}  // namespace ocv2
