#pragma once

#include <algorithm>
#include <memory>
#include <string>
#include <vector>

#include "ocv2/env.hpp"
#include "ocv2/layout.hpp"
#include "ocv2/permutation.hpp"

namespace ocv2::support {

inline EnvConfig config_for(const std::string& name) {
  EnvConfig c;
  c.layout = builtin_ptr(name);
  return c;
}

inline EnvConfig config_from_text(const std::string& text, const std::string& name = "test") {
  EnvConfig c;
  c.layout = std::make_shared<const Layout>(parse_layout(text, name));
  return c;
}

inline std::vector<Action> random_actions(Rng& rng, std::size_t n) {
  std::vector<Action> a(n);
  for (auto& x : a) x = kAllActions[rng.below(kAllActions.size())];
  return a;
}

// State after `steps` uniformly random joint actions.
inline GameState random_state(const EnvConfig& config, std::uint64_t seed, int steps) {
  GameState s = reset(config, seed);
  Rng rng(seed ^ 0xabcdefULL);
  for (int k = 0; k < steps && s.t < config.max_steps; ++k) step_inplace(config, s, random_actions(rng, s.agents.size()));
  return s;
}

inline const Layout& demo_layout() {
  static const Layout l = parse_layout("\nWWPWW\n0A A1\nL   R\nWBWXW\n\nrecipes=0,0,1;0,1,1\n", "demo");
  return l;
}

// Open rooms with 3 and 4 agents for collision work.
inline const std::vector<std::string>& crowded_layouts() {
  static const std::vector<std::string> texts = {
      "WWWPWW\n0AA  X\nW  A W\nWBWWWW\n",
      "WWPWWW\n0A  AX\nW A  W\n1 A  W\nWWBWWW\n",
      "WWWW\n0AAX\nWAAW\nWBPW\n",
  };
  return texts;
}

inline ItemCode random_item(Rng& rng, int n) {
  std::vector<int> counts(static_cast<std::size_t>(n), 0);
  const int total = static_cast<int>(rng.below(4));
  for (int k = 0; k < total; ++k) ++counts[rng.below(static_cast<std::uint64_t>(n))];
  const bool cooked = total > 0 && rng.below(2) == 0;
  return encode_item(rng.below(2) == 0, cooked, counts);
}

// Random walk, then items scattered over counters, pots and hands.
inline GameState scrambled_state(const EnvConfig& c, std::uint64_t seed) {
  GameState s = random_state(c, seed, static_cast<int>(seed % 40));
  Rng rng(seed * 31 + 7);
  const int n = c.num_ingredients();
  for (std::size_t i = 0; i < s.grid.statics.size(); ++i) {
    const CellKind k = s.grid.statics[i].kind();
    if ((k == CellKind::Wall || k == CellKind::Pot) && rng.below(3) == 0) s.grid.items[i] = random_item(rng, n);
    if ((k == CellKind::Pot || k == CellKind::ButtonRecipeIndicator) && rng.below(3) == 0) {
      s.grid.timers[i] = static_cast<int>(rng.below(20));
    }
  }
  for (auto& a : s.agents) a.inventory = random_item(rng, n);
  s.recipe = c.layout->possible_recipes[rng.below(c.layout->possible_recipes.size())];
  s.delivered_signal = rng.below(2) == 0;
  return s;
}

inline std::vector<IngredientPermutation> all_permutations(int n) {
  std::vector<int> m(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) m[static_cast<std::size_t>(i)] = i;
  std::vector<IngredientPermutation> out;
  do out.emplace_back(m);
  while (std::next_permutation(m.begin(), m.end()));
  return out;
}

}  // namespace ocv2::support
