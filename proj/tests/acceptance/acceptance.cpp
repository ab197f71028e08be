// One line per criterion: PASS/FAIL key detail.
// --only KEY runs one criterion; exit 0 pass, 1 fail, 77 when the machine
// cannot exercise it (reported FAIL, ctest marks it skipped).

#include <CLI11.hpp>
#include <boost/math/distributions/chi_squared.hpp>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <sstream>
#include <thread>
#include <unistd.h>

#include "ocv2/button_game.hpp"
#include "ocv2/eval.hpp"
#include "ocv2/observation.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace ocv2;
using support::config_for;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
  bool unattainable = false;
};

// collects the first failure and keeps counting
struct Checker {
  bool ok = true;
  std::string first;
  void expect(bool cond, const std::string& what) {
    if (!cond && ok) first = what;
    ok = ok && cond;
  }
  Outcome done(const std::string& summary) const { return {ok, ok ? summary : first}; }
};

std::string fmt(const char* f, double a, double b = 0, double c = 0, double d = 0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c, d);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

GameState place(GameState s, int agent, Pos p, Dir d, ItemCode inv = kEmptyItem) {
  auto& a = s.agents[static_cast<std::size_t>(agent)];
  a.pos = p;
  a.dir = d;
  a.inventory = inv;
  return s;
}

ItemCode three_of(int i) {
  return merge_ingredients(merge_ingredients(single_ingredient(i), single_ingredient(i)), single_ingredient(i));
}

// ---------------------------------------------------------------------------

Outcome button_game() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto ex = button_game::run_experiment(button_game::Config{}, 10, 0, {});
  const double secs = seconds_since(t0);
  Checker c;
  c.expect(ex.sp_mean >= 9.5, fmt("SP mean %.3f < 9.5", ex.sp_mean));
  c.expect(ex.br_min == 10.0, fmt("BR min %.3f != 10", ex.br_min));
  c.expect(ex.xp_mean <= 5.0, fmt("XP mean %.3f > 5", ex.xp_mean));
  c.expect(ex.xp_mean < ex.sp_mean - 3.0, fmt("XP mean %.3f not below SP - 3", ex.xp_mean));
  c.expect(secs < 60.0, fmt("took %.1f s", secs));
  return c.done(fmt("SP %.2f, XP %.2f, BR min %.1f, %.2f s", ex.sp_mean, ex.xp_mean, ex.br_min, secs));
}

Outcome determinism() {
  const auto dir = std::filesystem::temp_directory_path() / ("ocv2_accept_" + std::to_string(::getpid()));
  std::filesystem::create_directories(dir);
  Checker c;
  int files = 0;
  for (const auto& name : builtin_names()) {
    const EnvConfig cfg = config_for(name);
    for (std::uint64_t e = 0; e < 100 && c.ok; ++e) {
      std::vector<Trajectory> runs;
      for (int rep = 0; rep < 2; ++rep) {
        std::vector<std::unique_ptr<Policy>> seats;
        for (int a = 0; a < cfg.num_agents(); ++a) seats.push_back(make_policy("random"));
        runs.push_back(rollout(cfg, seats, e));
      }
      bool same = runs[0].size() == runs[1].size();
      for (std::size_t k = 0; same && k < runs[0].size(); ++k) same = runs[0].steps[k].state_hash == runs[1].steps[k].state_hash;
      c.expect(same, name + " episode " + std::to_string(e) + " diverged between runs");
      const auto path = (dir / (name + "_" + std::to_string(e) + ".jsonl")).string();
      save_replay(runs[0], path);
      const VerifyResult v = verify_replay(path);
      c.expect(v.ok, path + ": " + v.message);
      ++files;
    }
  }
  std::filesystem::remove_all(dir);
  return c.done(std::to_string(builtin_names().size()) + " layouts, " + std::to_string(files) + " replays verified");
}

Outcome collisions() {
  Checker c;
  int steps = 0;
  std::vector<EnvConfig> configs;
  for (const auto& t : support::crowded_layouts()) configs.push_back(support::config_from_text(t));
  for (const auto& n : {"cramped_room", "coord_ring", "forced_coord", "counter_circuit"}) configs.push_back(config_for(n));
  Rng rng(2718);
  for (std::size_t ci = 0; steps < 10000; ci = (ci + 1) % configs.size()) {
    const EnvConfig& cfg = configs[ci];
    GameState s = reset(cfg, static_cast<std::uint64_t>(steps));
    for (int k = 0; k < 250; ++k, ++steps) {
      const GameState prev = s;
      const auto actions = support::random_actions(rng, s.agents.size());
      const auto prop = move_agents(s, actions);
      std::vector<Pos> before;
      for (const auto& a : prev.agents) before.push_back(a.pos);
      const auto res = resolve_collisions(prop.positions, before);
      c.expect(res.iterations <= static_cast<int>(before.size()), "resolution took more than n iterations");
      c.expect(resolve_collisions(res.positions, before).positions == res.positions, "resolution is not a fixed point");
      step_inplace(cfg, s, actions);
      for (std::size_t i = 0; i < s.agents.size(); ++i) {
        c.expect(s.agents[i].pos == res.positions[i], "step disagrees with resolve_collisions");
        for (std::size_t j = i + 1; j < s.agents.size(); ++j) {
          c.expect(!(s.agents[i].pos == s.agents[j].pos), "two agents share a cell");
          c.expect(!(s.agents[i].pos == before[j] && s.agents[j].pos == before[i] && !(before[i] == before[j])),
                   "two agents swapped");
        }
      }
    }
  }
  int micro = 0;
  for (int trial = 0; trial < 20000; ++trial, ++micro) {
    const std::size_t n = 1 + rng.below(4);
    std::vector<Pos> prev;
    while (prev.size() < n) {
      const Pos p{static_cast<int>(rng.below(3)), static_cast<int>(rng.below(3))};
      if (std::find(prev.begin(), prev.end(), p) == prev.end()) prev.push_back(p);
    }
    std::vector<Pos> prop;
    for (Pos p : prev) {
      const auto k = rng.below(5);
      prop.push_back(k == 4 ? p : p + delta(static_cast<Dir>(k)));
    }
    c.expect(resolve_collisions(prop, prev).positions == oracle::collisions(prop, prev),
             "oracle mismatch on micro configuration " + std::to_string(trial));
  }
  return c.done(std::to_string(steps) + " steps with 2-4 agents, " + std::to_string(micro) + " micro configurations");
}

Outcome encoding() {
  Checker c;
  long valid_total = 0, invalid_total = 0;
  for (int n = 1; n <= 4; ++n) {
    long valid = 0;
    const std::uint32_t limit = 1u << (2 + 2 * n + 1);
    for (std::uint32_t raw = 0; raw < limit; ++raw) {
      const auto f = oracle::read_fields(raw, n);
      const ItemCode code{raw};
      const bool ok = oracle::item_valid(f);
      c.expect(is_valid_item(code, n) == ok, "validity mismatch at raw " + std::to_string(raw));
      if (!ok) {
        ++invalid_total;
        bool threw = false;
        try {
          decode_item(code, n);
        } catch (const ParseError&) {
          threw = true;
        }
        c.expect(threw, "invalid code accepted: " + std::to_string(raw));
        continue;
      }
      ++valid;
      const DecodedItem d = decode_item(code, n);
      c.expect(d.counts == f.counts && d.plated == f.plated && d.cooked == f.cooked, "decode mismatch");
      c.expect(encode_item(d.plated, d.cooked, d.counts) == code, "round trip failed at " + std::to_string(raw));
    }
    c.expect(valid == 4 * oracle::binom(n + 3, 3) - 2, "valid count off for n=" + std::to_string(n));
    valid_total += valid;
  }
  return c.done(std::to_string(valid_total) + " valid codes round-trip, " + std::to_string(invalid_total) + " invalid rejected");
}

Outcome parser() {
  Checker c;
  for (const auto& name : builtin_names()) {
    const Layout& l = builtin(name);
    const std::string canon = serialize_layout(l);
    const Layout again = parse_layout(canon, name);
    c.expect(again == l && serialize_layout(again) == canon, "fixpoint fails on " + name);
  }
  Rng rng(2024);
  for (int k = 0; k < 1000; ++k) {
    const std::string text = oracle::random_layout(rng);
    const Layout l = parse_layout(text);
    const std::string canon = serialize_layout(l);
    const Layout again = parse_layout(canon);
    c.expect(again == l && serialize_layout(again) == canon, "fixpoint fails on generated layout " + std::to_string(k));
  }
  const Layout& demo = support::demo_layout();
  c.expect(demo.width == 5 && demo.height == 4, "demo is not 5x4");
  c.expect(demo.possible_recipes.size() == 2, "demo does not have 2 recipes");
  c.expect(demo.num_agents() == 2 && demo.num_ingredients == 2, "demo agents or ingredients off");
  return c.done(std::to_string(builtin_names().size()) + " built-ins and 1000 generated layouts at fixpoint; demo 5x4, 2 recipes");
}

Outcome dynamics() {
  Checker c;
  const std::vector<Action> interact0 = {Action::Interact, Action::Stay}, idle = {Action::Stay, Action::Stay};
  {
    const EnvConfig cfg = config_for("cramped_room");
    GameState s = reset(cfg, 0);
    s = place(s, 0, {3, 2}, Dir::Down, s.recipe.dish());
    c.expect(step_inplace(cfg, s, interact0).rewards == std::vector<double>{20, 20}, "correct delivery does not pay +20 to all");
  }
  for (bool negative : {false, true}) {
    EnvConfig cfg = config_for("cramped_room_v2");
    cfg.negative_rewards = negative;
    GameState s = reset(cfg, 0);
    const auto& rs = cfg.layout->possible_recipes;
    const Recipe other = s.recipe == rs[0] ? rs[1] : rs[0];
    s = place(s, 0, {3, 2}, Dir::Down, other.dish());
    const double want = negative ? -20.0 : 0.0;
    c.expect(step_inplace(cfg, s, interact0).rewards == std::vector<double>{want, want},
             negative ? "wrong delivery not -20 with negative_rewards" : "wrong delivery penalised without negative_rewards");
  }
  for (int dur : {1, 6, 11}) {
    EnvConfig cfg = config_for("grounded_coord_simple");
    cfg.button_duration = dur;
    GameState s = place(reset(cfg, 0), 0, {1, 3}, Dir::Left);
    const int ch = ObsSchema(cfg.num_ingredients()).group("recipe_indicator").offset;
    auto shows = [&](const GameState& st) {
      const ObsTensor o = observe(cfg, st, 0);
      int sum = 0;
      for (int i = 0; i < cfg.num_ingredients(); ++i) sum += o.at(0, 3, ch + i);
      return sum == 3;
    };
    c.expect(!shows(s), "indicator visible before press");
    step_inplace(cfg, s, interact0);
    int seen = 0;
    while (shows(s) && seen < 100) {
      ++seen;
      step_inplace(cfg, s, idle);
    }
    c.expect(seen == dur, fmt("button visible for %.0f observations, want %.0f", seen, dur));
  }
  for (int cook : {1, 5, 20}) {
    EnvConfig cfg = config_for("cramped_room");
    cfg.cook_time = cook;
    GameState s = reset(cfg, 0);
    const std::size_t pot = s.grid.index({2, 0});
    s.grid.items[pot] = merge_ingredients(single_ingredient(0), single_ingredient(0));
    s = place(s, 0, {2, 1}, Dir::Up, single_ingredient(0));
    step_inplace(cfg, s, interact0);
    int ticks = 0;
    while (!s.grid.items[pot].cooked() && ticks < 100) {
      step_inplace(cfg, s, idle);
      ++ticks;
    }
    c.expect(ticks == cook, fmt("pot cooked after %.0f ticks, want %.0f", ticks, cook));
    c.expect(s.grid.items[pot] == three_of(0).with_cooked(), "cooked pot is not ingredients + cooked flag");
  }
  return c.done("delivery +20 / -20 iff negative_rewards, button 1/6/11 obs, cook 1/5/20 ticks");
}

Outcome equivariance() {
  std::vector<EnvConfig> configs = {config_for("cramped_room_v2"), config_for("two_rooms"), config_for("grounded_coord_ring"),
                                    support::config_from_text("WWPWWW\n0A  A1\nW   RW\nW2BWXW\n")};
  configs[1].view_radius = 1;
  configs[2].view_radius = 2;
  Checker c;
  int states = 0, checks = 0;
  for (std::uint64_t seed = 0; seed < 1000; ++seed, ++states) {
    const EnvConfig& cfg = configs[seed % configs.size()];
    const GameState s = support::scrambled_state(cfg, seed);
    const ObsSchema schema(cfg.num_ingredients());
    for (const auto& phi : support::all_permutations(cfg.num_ingredients())) {
      const GameState r = relabel_state(s, phi);
      for (int a = 0; a < cfg.num_agents(); ++a, ++checks) {
        const ObsTensor o = observe(cfg, s, a);
        c.expect(observe(cfg, r, a) == permute(o, phi, schema), "equivariance fails at seed " + std::to_string(seed));
        c.expect(permute(permute(o, phi, schema), phi.inverse(), schema) == o, "phi then inverse is not identity");
      }
    }
  }
  return c.done(std::to_string(states) + " states, " + std::to_string(checks) + " observation checks");
}

Outcome start_buffer() {
  Checker c;
  const EnvConfig cfg = config_for("cramped_room");
  std::vector<PolicySpec> pop = {policy_spec("greedy"), policy_spec("random")};
  const StateBuffer buf = collect_buffer(cfg, pop, 2, 17);
  const std::size_t want = 2 * 2 * 2 * static_cast<std::size_t>((cfg.max_steps + 1 + 9) / 10);
  c.expect(buf.size() == want && expected_buffer_size(2, 2, cfg.max_steps) == want,
           fmt("buffer size %.0f, want %.0f", static_cast<double>(buf.size()), static_cast<double>(want)));
  for (auto [p, r, t] : {std::tuple{3, 1, 100}, {1, 4, 9}, {4, 2, 55}}) {
    const std::size_t ceil_part = static_cast<std::size_t>((t + 1 + 9) / 10);
    c.expect(expected_buffer_size(static_cast<std::size_t>(p), static_cast<std::size_t>(r), t) ==
                 static_cast<std::size_t>(p * p * r) * ceil_part,
             "expected_buffer_size formula off");
  }
  std::vector<int> hist(buf.size());
  Rng rng(5);
  const std::size_t draws = buf.size() * 100;
  for (std::size_t k = 0; k < draws; ++k) ++hist[buf.sample_index(rng)];
  const double e = static_cast<double>(draws) / static_cast<double>(buf.size());
  double chi2 = 0;
  for (int h : hist) chi2 += (h - e) * (h - e) / e;
  const double p = boost::math::cdf(boost::math::complement(boost::math::chi_squared(static_cast<double>(buf.size() - 1)), chi2));
  c.expect(p > 0.01, fmt("chi-square p = %.4f", p));
  int resumed = 0;
  for (const auto& entry : buf.entries()) {
    const GameState r = reset_to(cfg, entry.state);
    for (int a = 0; a < cfg.num_agents(); ++a) c.expect(observe(cfg, r, a) == observe(cfg, entry.state, a), "reset_to changed an observation");
    ++resumed;
  }
  return c.done(fmt("buffer %.0f states, chi-square p = %.3f, %.0f states resumed", static_cast<double>(buf.size()), p, resumed));
}

Outcome baseline() {
  Checker c;
  const EnvConfig cfg = config_for("cramped_room");
  std::vector<std::unique_ptr<Policy>> seats;
  seats.push_back(make_policy("greedy"));
  seats.push_back(make_policy("greedy"));
  const Trajectory tr = rollout(cfg, seats, 0);
  c.expect(tr.size() == 400 && tr.total_reward() >= 20.0, fmt("greedy pair return %.0f", tr.total_reward()));

  EnvConfig two = config_for("demo_cook_simple");
  two.negative_rewards = true;
  const auto& recipes = two.layout->possible_recipes;
  c.expect(recipes.size() == 2, "exploit layout needs two recipes");
  double sum = 0;
  int pairs = 0;
  for (std::uint64_t seed = 0; seed < 200; ++seed, ++pairs) {
    GameState s = reset(two, seed);
    double total = 0;
    for (const Recipe& r : recipes) {
      s = place(s, 1, {7, 3}, Dir::Right, r.dish());
      total += step_inplace(two, s, std::vector<Action>{Action::Stay, Action::Interact}).rewards[0];
    }
    c.expect(total == 0.0, fmt("alternating pair netted %.0f", total));
    sum += total;
  }
  return c.done(fmt("greedy return %.0f; alternating exploit mean %.1f over %.0f pairs", tr.total_reward(), sum / pairs, pairs));
}

// steps/s for one worker stepping cramped_room with random joint actions
double worker_rate(std::uint64_t seed, long steps) {
  const EnvConfig cfg = config_for("cramped_room");
  GameState s = reset(cfg, seed);
  Rng rng(seed);
  std::vector<Action> a(2);
  for (long k = 0; k < steps; ++k) {
    if (s.t >= cfg.max_steps) s = reset(cfg, seed + static_cast<std::uint64_t>(k));
    a[0] = kAllActions[rng.below(kNumActions)];
    a[1] = kAllActions[rng.below(kNumActions)];
    step_inplace(cfg, s, a);
  }
  return static_cast<double>(steps);
}

double measure(int workers, long steps_each) {
  const auto t0 = std::chrono::steady_clock::now();
  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w) pool.emplace_back([=] { worker_rate(static_cast<std::uint64_t>(w), steps_each); });
  for (auto& t : pool) t.join();
  return workers * static_cast<double>(steps_each) / seconds_since(t0);
}

Outcome throughput() {
  const long n = 400000;
  measure(1, n / 4);  // warm-up
  const double single = measure(1, n);
  const unsigned hw = std::thread::hardware_concurrency();
  std::string detail = fmt("%.0f steps/s single-threaded", single);
  if (single < 100000.0) return {false, detail + " (< 100000)"};
  if (hw < 4) {
    return {false, detail + "; 4-worker scaling unattainable on " + std::to_string(hw) + " hardware thread(s)", true};
  }
  const double four = measure(4, n);
  const double eff = four / (4 * single);
  detail += fmt("; 4 workers %.0f steps/s, efficiency %.2f", four, eff);
  return {eff >= 0.8, detail};
}

const std::vector<std::pair<std::string, std::function<Outcome()>>>& criteria() {
  static const std::vector<std::pair<std::string, std::function<Outcome()>>> list = {
      {"button_game", button_game}, {"determinism", determinism}, {"collisions", collisions},
      {"encoding", encoding},       {"parser", parser},           {"dynamics", dynamics},
      {"equivariance", equivariance}, {"start_buffer", start_buffer},             {"baseline", baseline},
      {"throughput", throughput}};
  return list;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ocv2 acceptance runner"};
  std::string only;
  bool list = false;
  app.add_option("--only", only, "run a single criterion");
  app.add_flag("--list", list, "print criterion keys");
  CLI11_PARSE(app, argc, argv);
  if (list) {
    for (const auto& [key, fn] : criteria()) std::printf("%s\n", key.c_str());
    return 0;
  }
  bool any_fail = false, any_unattainable = false, ran = false;
  for (const auto& [key, fn] : criteria()) {
    if (!only.empty() && key != only) continue;
    ran = true;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    std::printf("%s %-13s %s (%.1fs)\n", o.pass ? "PASS" : "FAIL", key.c_str(), o.detail.c_str(), seconds_since(t0));
    std::fflush(stdout);
    if (!o.pass) (o.unattainable ? any_unattainable : any_fail) = true;
  }
  if (!ran) {
    std::fprintf(stderr, "unknown criterion '%s'\n", only.c_str());
    return 1;
  }
  if (any_fail) return 1;
  return any_unattainable ? 77 : 0;
}
