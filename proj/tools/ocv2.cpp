#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "ocv2/button_game.hpp"
#include "ocv2/eval.hpp"
#include "ocv2/layout.hpp"
#include "ocv2/observation.hpp"
#include "ocv2/render.hpp"
#include "ocv2/serialize.hpp"
#ifdef OCV2_HAVE_SERVER
#include "ocv2/server.hpp"
#endif

using namespace ocv2;
namespace fs = std::filesystem;

namespace {

// Environment flags shared by the simulation subcommands. Precedence:
// explicit flags, then the --config file, then built-in defaults.
struct EnvFlags {
  std::string config_file;
  std::string layout;
  std::optional<int> view_radius;
  std::optional<int> max_steps;
  std::optional<int> cook_time;
  bool negative_rewards = false;
  bool random_positions = false;
  bool resample_recipe = false;
  bool indicate_delivery = false;
  std::vector<std::string> sets;

  void add(CLI::App* app) {
    app->add_option("--config", config_file, "JSON file of EnvConfig overrides")->check(CLI::ExistingFile);
    app->add_option("--layout", layout, "built-in layout name or .layout path");
    app->add_option("--view-radius", view_radius, "Chebyshev view radius (omit for full view)")
        ->check(CLI::NonNegativeNumber);
    app->add_option("--max-steps", max_steps, "episode length")->check(CLI::PositiveNumber);
    app->add_option("--cook-time", cook_time, "ticks a full pot needs")->check(CLI::PositiveNumber);
    app->add_flag("--negative-rewards", negative_rewards, "-20 for a wrong delivery");
    app->add_flag("--random-positions", random_positions, "random agent starts");
    app->add_flag("--resample-recipe", resample_recipe, "draw a new recipe after each correct delivery");
    app->add_flag("--indicate-delivery", indicate_delivery, "show the delivered signal");
    app->add_option("--set", sets, "any config field, key=<json value>; repeatable");
  }

  EnvConfig build() const {
    EnvConfig config;
    config.layout = builtin_ptr("cramped_room");
    if (!config_file.empty()) {
      std::ifstream in(config_file);
      Json file;
      try {
        file = Json::parse(in);
      } catch (const nlohmann::json::exception& e) {
        throw ParseError(config_file + ": " + e.what());
      }
      apply_config_overrides(config, file);
    }
    Json o = Json::object();
    if (!layout.empty()) o["layout"] = layout;
    if (view_radius) o["view_radius"] = *view_radius;
    if (max_steps) o["max_steps"] = *max_steps;
    if (cook_time) o["cook_time"] = *cook_time;
    if (negative_rewards) o["negative_rewards"] = true;
    if (random_positions) o["random_agent_positions"] = true;
    if (resample_recipe) o["sample_recipe_on_delivery"] = true;
    if (indicate_delivery) o["indicate_successful_delivery"] = true;
    for (const auto& kv : sets) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos) throw InvalidArgument("--set expects key=value, got '" + kv + "'");
      const std::string key = kv.substr(0, eq), value = kv.substr(eq + 1);
      try {
        o[key] = Json::parse(value);
      } catch (const nlohmann::json::exception&) {
        o[key] = value;  // bare strings
      }
    }
    apply_config_overrides(config, o);
    config.check();
    return config;
  }
};

std::vector<std::string> split_csv(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::vector<PolicySpec> population_of(const std::string& csv) {
  std::vector<PolicySpec> out;
  for (const auto& name : split_csv(csv)) out.push_back(policy_spec(name));
  if (out.empty()) throw InvalidArgument("--policies is empty");
  return out;
}

// One policy per seat; a single name fills every seat.
std::vector<std::unique_ptr<Policy>> seats_of(const std::string& csv, int agents) {
  auto names = split_csv(csv);
  if (names.size() == 1) names.assign(static_cast<std::size_t>(agents), names.front());
  if (static_cast<int>(names.size()) != agents) {
    throw InvalidArgument("--policies lists " + std::to_string(names.size()) + " policies for " +
                          std::to_string(agents) + " agents");
  }
  std::vector<std::unique_ptr<Policy>> out;
  for (const auto& n : names) out.push_back(make_policy(n));
  return out;
}

std::string with_extension(const std::string& path, const std::string& ext) {
  return fs::path(path).replace_extension(ext).string();
}

int cmd_rollout(const EnvFlags& env, const std::string& policies, std::uint64_t seed, int episodes,
                const std::string& out, bool ascii) {
  const EnvConfig config = env.build();
  if (!out.empty() && episodes > 1) fs::create_directories(out);
  Json summary = Json::array();
  for (int e = 0; e < episodes; ++e) {
    auto seats = seats_of(policies, config.num_agents());
    const std::uint64_t s = episode_seed(seed, 0, 0, static_cast<std::uint64_t>(e));
    const Trajectory tr = rollout(config, seats, s);
    std::string path;
    if (!out.empty()) {
      path = episodes > 1 ? (fs::path(out) / ("episode_" + std::to_string(e) + ".jsonl")).string() : out;
      save_replay(tr, path);
    }
    summary.push_back(Json{{"episode", e},
                           {"seed", hex64(s)},
                           {"return", tr.total_reward()},
                           {"steps", tr.size()},
                           {"final_hash", hex64(tr.final_hash)},
                           {"replay", path.empty() ? Json(nullptr) : Json(path)}});
    if (ascii) std::cerr << render_ascii(trajectory_states(tr).back(), config);
  }
  std::cout << summary.dump(2) << "\n";
  return 0;
}

int cmd_verify(const std::vector<std::string>& files) {
  int bad = 0;
  for (const auto& f : files) {
    const VerifyResult r = verify_replay(f);
    std::cout << f << ": " << (r.ok ? "ok" : "FAIL") << " " << r.message << "\n";
    bad += r.ok ? 0 : 1;
  }
  return bad == 0 ? 0 : 1;
}

int cmd_eval_xp(const EnvFlags& env, const std::string& policies, std::uint64_t seed, int episodes, int jobs,
                bool unordered, const std::string& out) {
  const EnvConfig config = env.build();
  CrossPlayOptions opt;
  opt.episodes = episodes;
  opt.jobs = jobs;
  opt.unordered_xp = unordered;
  const CrossPlayMatrix m = crossplay(config, population_of(policies), seed, opt);
  Json j = m.to_json();
  j["layout"] = config.layout->name;
  j["seed"] = seed;
  j["config_digest"] = config_digest(config);
  if (out.empty() || out == "-") {
    std::cout << j.dump(2) << "\n";
  } else {
    write_file_atomic(with_extension(out, ".csv"), m.to_csv());
    write_file_atomic(with_extension(out, ".json"), j.dump(2) + "\n");
    std::cout << j["stats"].dump(2) << "\n";
  }
  return 0;
}

int cmd_augment(const EnvFlags& env, const std::string& policies, std::uint64_t seed, int rollouts, int jobs,
                const std::string& out) {
  const EnvConfig config = env.build();
  const auto pop = population_of(policies);
  const StateBuffer buffer = collect_buffer(config, pop, rollouts, seed, jobs);
  if (!out.empty()) buffer.save(out);
  std::cout << Json{{"states", buffer.size()},
                    {"expected", expected_buffer_size(pop.size(), static_cast<std::size_t>(rollouts), config.max_steps)},
                    {"out", out.empty() ? Json(nullptr) : Json(out)}}
                   .dump(2)
            << "\n";
  return 0;
}

int cmd_button_game(int seeds, int buttons, int episodes, std::uint64_t seed, const std::string& out,
                    const std::string& heatmap) {
  button_game::Config cfg;
  cfg.n_buttons = buttons;
  cfg.check();
  button_game::TrainOptions opt;
  opt.episodes = episodes;
  const auto ex = button_game::run_experiment(cfg, seeds, seed, opt);
  std::ostringstream csv;
  csv.precision(10);
  csv << "alice\\bob";
  for (const auto& l : ex.labels) csv << ',' << l;
  csv << '\n';
  for (std::size_t i = 0; i < ex.matrix.size(); ++i) {
    csv << ex.labels[i];
    for (double v : ex.matrix[i]) csv << ',' << v;
    csv << '\n';
  }
  const Json stats{{"sp_mean", ex.sp_mean}, {"xp_mean", ex.xp_mean}, {"br_min", ex.br_min}};
  const Json hm{{"rows", ex.labels}, {"cols", ex.labels}, {"values", ex.matrix}, {"vmin", -cfg.reward_magnitude},
                {"vmax", cfg.reward_magnitude}, {"row_axis", "alice"}, {"col_axis", "bob"}, {"stats", stats}};
  if (out.empty() || out == "-") {
    std::cout << csv.str();
  } else {
    write_file_atomic(out, csv.str());
    write_file_atomic(heatmap.empty() ? with_extension(out, ".json") : heatmap, hm.dump(2) + "\n");
  }
  std::cerr << stats.dump() << "\n";
  return 0;
}

int cmd_render(const EnvFlags& env, std::uint64_t seed, const std::string& replay, const std::string& out,
               bool frame_json, std::optional<int> at_step, int tile, int jobs) {
  if (!replay.empty()) {
    const Trajectory tr = load_replay(replay);
    if (!out.empty()) {
      export_animation(tr, out, tile, jobs);
      std::cout << "wrote " << tr.size() + 1 << " frames to " << out << "\n";
      return 0;
    }
    const auto states = trajectory_states(tr);
    const std::size_t k = at_step ? static_cast<std::size_t>(*at_step) : states.size() - 1;
    if (k >= states.size()) throw InvalidArgument("--step beyond the trajectory");
    std::cout << (frame_json ? frame_to_json(make_frame(tr.config, states[k])).dump(2) + "\n"
                             : render_ascii(states[k], tr.config));
    return 0;
  }
  const EnvConfig config = env.build();
  const GameState s = reset(config, seed);
  if (!out.empty()) {
    Trajectory tr;
    tr.config = config;
    tr.initial = s;
    export_animation(tr, out, tile, 1);
    std::cout << "wrote 1 frame to " << out << "\n";
    return 0;
  }
  std::cout << (frame_json ? frame_to_json(make_frame(config, s)).dump(2) + "\n" : render_ascii(s, config));
  return 0;
}

int cmd_validate(const std::vector<std::string>& files) {
  int bad = 0;
  for (const auto& f : files) {
    std::vector<std::string> issues;
    try {
      const Layout l = fs::exists(f) ? load_layout_file(f) : builtin(f);
      issues = validate(l);
      if (issues.empty()) {
        std::cout << f << ": ok (" << l.width << "x" << l.height << ", " << l.num_agents() << " agents, "
                  << l.possible_recipes.size() << " recipes)\n";
      }
    } catch (const Error& e) {
      issues.push_back(e.what());
    }
    for (const auto& i : issues) std::cout << f << ": " << i << "\n";
    bad += issues.empty() ? 0 : 1;
  }
  return bad == 0 ? 0 : 1;
}

std::optional<Action> key_action(const std::string& key) {
  if (key == "w" || key == "up") return Action::Up;
  if (key == "s" || key == "down") return Action::Down;
  if (key == "a" || key == "left") return Action::Left;
  if (key == "d" || key == "right") return Action::Right;
  if (key == "e" || key == " " || key == "interact") return Action::Interact;
  if (key == "x" || key.empty() || key == "stay") return Action::Stay;
  return std::nullopt;
}

int cmd_play(const EnvFlags& env, const std::string& partners, int seat, std::uint64_t seed, const std::string& out) {
  const EnvConfig config = env.build();
  const int n = config.num_agents();
  if (seat < 0 || seat >= n) throw InvalidArgument("--seat out of range");
  auto names = split_csv(partners);
  if (names.size() == 1) names.assign(static_cast<std::size_t>(n - 1), names.front());
  if (static_cast<int>(names.size()) != n - 1) throw InvalidArgument("--policies needs one entry per other seat");
  std::vector<std::unique_ptr<Policy>> seats(static_cast<std::size_t>(n));
  std::vector<Rng> rngs;
  for (int a = 0, k = 0; a < n; ++a) {
    if (a != seat) seats[static_cast<std::size_t>(a)] = make_policy(names[static_cast<std::size_t>(k++)]);
    rngs.push_back(Rng(seed).fork(0x5ea7ULL + static_cast<std::uint64_t>(a)));
  }
  Trajectory tr;
  tr.config = config;
  tr.config_digest = config_digest(config);
  tr.seed = seed;
  GameState s = reset(config, seed);
  tr.initial = s;
  double score = 0.0;
  std::cout << "you are agent " << seat << ". w/a/s/d move, e interact, x stay, q quit\n";
  std::string line;
  while (s.t < config.max_steps) {
    std::cout << render_ascii(s, config) << "score " << score << "\n> " << std::flush;
    if (!std::getline(std::cin, line) || line == "q") break;
    const auto mine = key_action(line);
    if (!mine) {
      std::cout << "unknown key '" << line << "'\n";
      continue;
    }
    std::vector<Action> actions(static_cast<std::size_t>(n), Action::Stay);
    for (int a = 0; a < n; ++a) {
      const auto i = static_cast<std::size_t>(a);
      if (a == seat) {
        actions[i] = *mine;
      } else {
        const ObsTensor obs = observe(config, s, a);
        actions[i] = seats[i]->act(PolicyInput{config, s, obs, a}, rngs[i]);
      }
    }
    StepOutcome o = step_inplace(config, s, actions);
    score += o.rewards.front();
    tr.steps.push_back({actions, o.rewards, o.shaped, o.events, state_hash(s)});
  }
  tr.final_hash = state_hash(s);
  std::cout << "final score " << score << " after " << s.t << " steps\n";
  if (!out.empty()) save_replay(tr, out);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"OvercookedV2 environment and evaluation tools"};
  app.require_subcommand(1);

  EnvFlags env;
  std::string policies = "greedy";
  std::uint64_t seed = 0;
  int episodes = 1;
  int jobs = 1;
  std::string out;

  auto* rollout_cmd = app.add_subcommand("rollout", "run episodes and record replays");
  env.add(rollout_cmd);
  bool ascii = false;
  rollout_cmd->add_option("--policies", policies, "one policy per seat, comma separated (or one for all)");
  rollout_cmd->add_option("--seed", seed);
  rollout_cmd->add_option("--episodes", episodes)->check(CLI::PositiveNumber);
  rollout_cmd->add_option("--out", out, "replay file, or directory when --episodes > 1");
  rollout_cmd->add_flag("--ascii", ascii, "print each final state to stderr");

  auto* verify_cmd = app.add_subcommand("verify", "re-simulate replay files and check state hashes");
  std::vector<std::string> files;
  verify_cmd->add_option("files", files)->required();

  auto* xp_cmd = app.add_subcommand("eval-xp", "cross-play matrix with SP/XP/gap statistics");
  env.add(xp_cmd);
  bool unordered = false;
  int xp_episodes = 500;
  xp_cmd->add_option("--policies", policies, "population, comma separated")->required();
  xp_cmd->add_option("--seed", seed);
  xp_cmd->add_option("--episodes", xp_episodes, "episodes per cell")->check(CLI::PositiveNumber);
  xp_cmd->add_option("--jobs", jobs)->check(CLI::PositiveNumber);
  xp_cmd->add_option("--out", out, "writes <out>.json and <out>.csv");
  xp_cmd->add_flag("--unordered", unordered, "XP over unordered pairs");

  auto* aug_cmd = app.add_subcommand("augment-collect", "collect a start-state buffer from all ordered pairs");
  env.add(aug_cmd);
  int rollouts = 1;
  aug_cmd->add_option("--policies", policies, "population, comma separated")->required();
  aug_cmd->add_option("--seed", seed);
  aug_cmd->add_option("--episodes,--rollouts", rollouts, "rollouts per ordered pair")->check(CLI::PositiveNumber);
  aug_cmd->add_option("--jobs", jobs)->check(CLI::PositiveNumber);
  aug_cmd->add_option("--out", out, "buffer JSON");

  auto* bg_cmd = app.add_subcommand("button-game", "independent Q-learning seeds plus a best response");
  int bg_seeds = 10, buttons = 5, train_episodes = button_game::TrainOptions{}.episodes;
  std::string heatmap;
  bg_cmd->add_option("--seeds", bg_seeds)->check(CLI::PositiveNumber);
  bg_cmd->add_option("--buttons", buttons)->check(CLI::PositiveNumber);
  bg_cmd->add_option("--episodes", train_episodes, "training episodes per agent")->check(CLI::PositiveNumber);
  bg_cmd->add_option("--seed", seed);
  bg_cmd->add_option("--out", out, "matrix CSV");
  bg_cmd->add_option("--heatmap", heatmap, "heatmap JSON (default: <out>.json)");

  auto* render_cmd = app.add_subcommand("render", "ASCII, frame JSON or animated GIF");
  env.add(render_cmd);
  std::string replay;
  bool frame_json = false;
  std::optional<int> at_step;
  int tile = 16;
  render_cmd->add_option("--replay", replay, "replay file to render")->check(CLI::ExistingFile);
  render_cmd->add_option("--seed", seed, "reset seed when no replay is given");
  render_cmd->add_option("--out", out, "GIF path");
  render_cmd->add_option("--step", at_step, "state index to print")->check(CLI::NonNegativeNumber);
  render_cmd->add_option("--tile", tile, "pixels per cell")->check(CLI::Range(4, 64));
  render_cmd->add_option("--jobs", jobs)->check(CLI::PositiveNumber);
  render_cmd->add_flag("--json", frame_json, "print frame JSON instead of ASCII");

  auto* validate_cmd = app.add_subcommand("validate-layout", "parse and check layout files or built-in names");
  validate_cmd->add_option("layouts", files)->required();

  auto* serve_cmd = app.add_subcommand("serve", "HTTP/WebSocket session server");
  std::string host = "127.0.0.1", replay_dir;
  int port = 8080, poll_ms = 10;
  serve_cmd->add_option("--host", host);
  serve_cmd->add_option("--port", port)->check(CLI::Range(0, 65535));
  serve_cmd->add_option("--replay-dir", replay_dir, "save finished episodes here");
  serve_cmd->add_option("--poll-ms", poll_ms)->check(CLI::PositiveNumber);

  auto* play_cmd = app.add_subcommand("play", "play in the terminal against policies");
  env.add(play_cmd);
  int seat = 0;
  play_cmd->add_option("--seat", seat, "your agent index");
  play_cmd->add_option("--policies", policies, "partners, comma separated (or one for all)");
  play_cmd->add_option("--seed", seed);
  play_cmd->add_option("--out", out, "replay file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    if (*rollout_cmd) return cmd_rollout(env, policies, seed, episodes, out, ascii);
    if (*verify_cmd) return cmd_verify(files);
    if (*xp_cmd) return cmd_eval_xp(env, policies, seed, xp_episodes, jobs, unordered, out);
    if (*aug_cmd) return cmd_augment(env, policies, seed, rollouts, jobs, out);
    if (*bg_cmd) return cmd_button_game(bg_seeds, buttons, train_episodes, seed, out, heatmap);
    if (*render_cmd) return cmd_render(env, seed, replay, out, frame_json, at_step, tile, jobs);
    if (*validate_cmd) return cmd_validate(files);
    if (*play_cmd) return cmd_play(env, policies, seat, seed, out);
    if (*serve_cmd) {
#ifdef OCV2_HAVE_SERVER
      ServerOptions opt;
      opt.host = host;
      opt.port = static_cast<unsigned short>(port);
      opt.replay_dir = replay_dir;
      opt.poll_ms = poll_ms;
      Server server(opt);
      std::cout << "listening on http://" << host << ":" << server.port() << std::endl;
      server.run();
      return 0;
#else
      std::cerr << "error: built without the session server\n";
      return 1;
#endif
    }
  } catch (const InvalidArgument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
