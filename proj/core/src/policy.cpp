#include "ocv2/policy.hpp"

#include <deque>
#include <fstream>
#include <limits>
#include <optional>
#include <sstream>

namespace ocv2 {

std::string_view to_string(PolicyKind k) {
  switch (k) {
    case PolicyKind::Random: return "random";
    case PolicyKind::Greedy: return "greedy";
    case PolicyKind::Tabular: return "tabular";
    case PolicyKind::External: return "external";
  }
  return "unknown";
}

Action RandomPolicy::act(const PolicyInput&, Rng& rng) { return kAllActions[rng.below(kNumActions)]; }

namespace {

constexpr Dir kDirs[] = {Dir::Up, Dir::Down, Dir::Left, Dir::Right};
constexpr int kUnreached = std::numeric_limits<int>::max();

Action action_for(Dir d) { return static_cast<Action>(static_cast<int>(d)); }

struct PathField {
  std::vector<int> dist;
  std::vector<int> first;  // first action index taken from the origin, -1 at origin
};

PathField bfs(const GameState& s, Pos origin, int self, bool avoid_agents) {
  const Grid& g = s.grid;
  PathField f;
  f.dist.assign(g.statics.size(), kUnreached);
  f.first.assign(g.statics.size(), -1);
  std::vector<bool> blocked(g.statics.size(), false);
  if (avoid_agents) {
    for (std::size_t a = 0; a < s.agents.size(); ++a) {
      if (static_cast<int>(a) != self) blocked[g.index(s.agents[a].pos)] = true;
    }
  }
  std::deque<Pos> q{origin};
  f.dist[g.index(origin)] = 0;
  while (!q.empty()) {
    const Pos p = q.front();
    q.pop_front();
    const std::size_t pi = g.index(p);
    for (Dir d : kDirs) {
      const Pos n = p + delta(d);
      if (!g.in_bounds(n)) continue;
      const std::size_t ni = g.index(n);
      if (!g.statics[ni].walkable() || blocked[ni] || f.dist[ni] != kUnreached) continue;
      f.dist[ni] = f.dist[pi] + 1;
      f.first[ni] = f.first[pi] < 0 ? static_cast<int>(d) : f.first[pi];
      q.push_back(n);
    }
  }
  return f;
}

class Planner {
 public:
  Planner(const EnvConfig& config, const GameState& s, int agent)
      : config_(config), s_(s), agent_(agent), me_(s.agents[static_cast<std::size_t>(agent)]) {
    avoiding_ = bfs(s, me_.pos, agent, true);
    ignoring_ = bfs(s, me_.pos, agent, false);
  }

  /// Head for the nearest station cell satisfying `want` and interact with it.
  template <typename Pred>
  std::optional<Action> go_to(Pred want) const {
    if (auto a = go_to_with(avoiding_, want)) return a;
    return go_to_with(ignoring_, want);
  }

  const GameState& state() const { return s_; }
  const AgentState& me() const { return me_; }

 private:
  template <typename Pred>
  std::optional<Action> go_to_with(const PathField& field, Pred want) const {
    const Grid& g = s_.grid;
    struct Best {
      int dist = kUnreached;
      int action = kNumActions;
    } best;
    for (std::size_t i = 0; i < g.statics.size(); ++i) {
      if (g.statics[i].walkable() || !want(i)) continue;
      const Pos station{static_cast<int>(i) % g.width, static_cast<int>(i) / g.width};
      for (Dir d : kDirs) {
        const Pos stand = station + delta(d);
        if (!g.in_bounds(stand)) continue;
        const std::size_t si = g.index(stand);
        const int dist = field.dist[si];
        if (dist == kUnreached) continue;
        int action;
        if (dist == 0) {
          // Standing next to it: face it, then interact.
          const Dir facing = d == Dir::Up ? Dir::Down : d == Dir::Down ? Dir::Up : d == Dir::Left ? Dir::Right : Dir::Left;
          action = me_.dir == facing ? static_cast<int>(Action::Interact) : static_cast<int>(action_for(facing));
        } else {
          action = field.first[si];
        }
        // already facing a station beats turning to another one at the same distance
        const auto rank = [](int a) { return a == static_cast<int>(Action::Interact) ? -1 : a; };
        if (dist < best.dist || (dist == best.dist && rank(action) < rank(best.action))) best = {dist, action};
      }
    }
    if (best.dist == kUnreached) return std::nullopt;
    return static_cast<Action>(best.action);
  }

  const EnvConfig& config_;
  const GameState& s_;
  int agent_;
  AgentState me_;
  PathField avoiding_;
  PathField ignoring_;
};

Action plan_task(const EnvConfig& config, const GameState& s, int agent);

// Cell an agent ends up in if its move goes through unopposed.
Pos intended(const GameState& s, int agent, Action a) {
  const Pos at = s.agents[static_cast<std::size_t>(agent)].pos;
  const auto d = move_dir(a);
  if (!d) return at;
  const Pos n = at + delta(*d);
  return s.grid.in_bounds(n) && s.grid.statics[s.grid.index(n)].walkable() ? n : at;
}

}  // namespace

// Collision re-planning on top of the task planner. Head-on blocks: the
// higher index steps aside. Two agents heading for one free cell: the
// higher index waits.
Action GreedyPolicy::plan(const EnvConfig& config, const GameState& s, int agent) {
  const Action mine = plan_task(config, s, agent);
  const Pos here = s.agents[static_cast<std::size_t>(agent)].pos;
  const Pos target = intended(s, agent, mine);
  if (target == here) return mine;
  for (int o = 0; o < static_cast<int>(s.agents.size()); ++o) {
    if (o == agent) continue;
    const Pos there = s.agents[static_cast<std::size_t>(o)].pos;
    if (!(target == there) && agent < o) continue;
    const Pos theirs = intended(s, o, plan_task(config, s, o));
    if (target == there && theirs == here) {
      if (agent < o) return mine;
      for (Dir d : kDirs) {
        const Pos n = here + delta(d);
        if (!s.grid.in_bounds(n) || !s.grid.statics[s.grid.index(n)].walkable() || n == theirs) continue;
        bool taken = false;
        for (const auto& other : s.agents) taken = taken || other.pos == n;
        if (!taken) return action_for(d);
      }
      return Action::Stay;
    }
    if (agent > o && target == theirs && !(theirs == there)) return Action::Stay;
  }
  return mine;
}

namespace {

Action plan_task(const EnvConfig& config, const GameState& s, int agent) {
  const Planner p(config, s, agent);
  const Grid& g = s.grid;
  const ItemCode hand = p.me().inventory;
  auto kind = [&](std::size_t i) { return g.statics[i].kind(); };
  auto is_pot = [&](std::size_t i) { return kind(i) == CellKind::Pot; };
  auto cooking = [&](std::size_t i) { return is_pot(i) && g.timers[i] > 0; };
  auto cooked = [&](std::size_t i) { return is_pot(i) && g.items[i].cooked(); };
  auto idle = [&](std::size_t i) { return is_pot(i) && g.timers[i] == 0 && !g.items[i].cooked(); };
  auto empty_counter = [&](std::size_t i) { return kind(i) == CellKind::Wall && g.items[i].empty(); };
  auto any_pot = [&](auto pred) {
    for (std::size_t i = 0; i < g.statics.size(); ++i) {
      if (pred(i)) return true;
    }
    return false;
  };
  auto first_of = [](std::initializer_list<std::optional<Action>> options) -> std::optional<Action> {
    for (const auto& o : options) {
      if (o) return o;
    }
    return std::nullopt;
  };

  std::optional<Action> choice;
  if (hand.is_dish()) {
    choice = p.go_to([&](std::size_t i) { return kind(i) == CellKind::Delivery; });
  } else if (hand.is_bare_plate()) {
    choice = first_of({p.go_to(cooked), p.go_to(cooking)});
    if (!choice) choice = p.go_to(empty_counter);
  } else if (hand.is_raw_ingredient()) {
    choice = p.go_to([&](std::size_t i) {
      if (!idle(i) || g.items[i].total() + hand.total() > 3) return false;
      return is_sub_multiset(merge_ingredients(g.items[i], hand), s.recipe);
    });
    if (!choice) {
      // Finish off a pot that already holds a wrong mix so it can be cleared.
      choice = p.go_to([&](std::size_t i) {
        return idle(i) && g.items[i].total() + hand.total() <= 3 && !is_sub_multiset(g.items[i], s.recipe);
      });
    }
    if (!choice) choice = p.go_to(empty_counter);
  } else if (!hand.empty()) {
    choice = p.go_to(empty_counter);
  } else {
    if (any_pot(cooked) || any_pot(cooking)) {
      choice = p.go_to([&](std::size_t i) { return kind(i) == CellKind::PlatePile; });
    }
    if (!choice && !config.auto_start_cooking) {
      choice = p.go_to([&](std::size_t i) { return idle(i) && g.items[i].total() == 3; });
    }
    if (!choice) {
      // Ingredients still missing from a recipe-aligned pot.
      std::array<bool, kMaxIngredients> needed{};
      bool any_needed = false;
      for (std::size_t i = 0; i < g.statics.size(); ++i) {
        if (!idle(i) || g.items[i].total() >= 3) continue;
        if (is_sub_multiset(g.items[i], s.recipe)) {
          for (int k = 0; k < kMaxIngredients; ++k) {
            if (g.items[i].count(k) < s.recipe.count(k)) needed[static_cast<std::size_t>(k)] = any_needed = true;
          }
        } else {
          needed.fill(true);
          any_needed = true;
        }
      }
      if (any_needed) {
        choice = p.go_to([&](std::size_t i) {
          const int ing = g.statics[i].ingredient();
          return ing >= 0 && needed[static_cast<std::size_t>(ing)];
        });
      }
    }
  }
  return choice.value_or(Action::Stay);
}

}  // namespace

Action GreedyPolicy::act(const PolicyInput& in, Rng&) { return plan(in.config, in.state, in.agent); }

std::string TabularPolicy::key(const ObsTensor& obs) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto mix = [&](std::uint32_t v) {
    for (int i = 0; i < 4; ++i) {
      h ^= (v >> (8 * i)) & 0xffu;
      h *= 0x100000001b3ULL;
    }
  };
  mix(static_cast<std::uint32_t>(obs.width));
  mix(static_cast<std::uint32_t>(obs.height));
  mix(static_cast<std::uint32_t>(obs.channels));
  for (std::int32_t v : obs.data) mix(static_cast<std::uint32_t>(v));
  return hex64(h);
}

Action TabularPolicy::act(const PolicyInput& in, Rng&) {
  const auto it = table_.find(key(in.obs));
  if (it == table_.end()) return Action::Stay;
  std::size_t best = 0;
  for (std::size_t a = 1; a < it->second.size(); ++a) {
    if (it->second[a] > it->second[best]) best = a;
  }
  return static_cast<Action>(best);
}

Json TabularPolicy::to_json() const {
  Json table = Json::object();
  for (const auto& [k, v] : table_) table[k] = v;
  return Json{{"kind", "tabular"}, {"parameters", Json{{"table", std::move(table)}}}};
}

TabularPolicy TabularPolicy::from_json(const Json& j) {
  try {
    Table t;
    for (const auto& [k, v] : j.at("parameters").at("table").items()) {
      const auto values = v.get<std::vector<double>>();
      if (values.size() != kNumActions) throw ParseError("tabular policy: entry '" + k + "' needs 6 action values");
      std::array<double, kNumActions> row{};
      std::copy(values.begin(), values.end(), row.begin());
      t.emplace(k, row);
    }
    return TabularPolicy(std::move(t));
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("tabular policy: ") + e.what());
  }
}

std::unique_ptr<Policy> policy_from_json(const Json& j) {
  if (!j.is_object() || !j.contains("kind")) throw ParseError("policy file: expected {kind, parameters}");
  const auto kind = j.at("kind").get<std::string>();
  if (kind == "random") return std::make_unique<RandomPolicy>();
  if (kind == "greedy") return std::make_unique<GreedyPolicy>();
  if (kind == "tabular") return std::make_unique<TabularPolicy>(TabularPolicy::from_json(j));
  throw ParseError("policy file: unsupported kind '" + kind + "'");
}

std::unique_ptr<Policy> make_policy(const std::string& name) {
  if (name == "random") return std::make_unique<RandomPolicy>();
  if (name == "greedy") return std::make_unique<GreedyPolicy>();
  std::ifstream in(name);
  if (!in) throw InvalidArgument("unknown policy '" + name + "'; expected random, greedy, or a policy JSON file");
  try {
    return policy_from_json(Json::parse(in));
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("policy file '" + name + "': " + e.what());
  }
}

}  // namespace ocv2
