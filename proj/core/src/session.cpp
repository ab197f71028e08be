#include "ocv2/session.hpp"

#include <filesystem>

#include "ocv2/observation.hpp"

namespace ocv2 {

std::string_view to_string(SessionStatus s) {
  switch (s) {
    case SessionStatus::Waiting: return "waiting";
    case SessionStatus::Running: return "running";
    case SessionStatus::Paused: return "paused";
    case SessionStatus::Done: return "done";
  }
  return "?";
}

SeatSpec parse_seat(const std::string& text) {
  if (text == "human") return {true, {}};
  if (text.empty()) throw InvalidArgument("empty seat");
  return {false, text};
}

Session::Session(std::string id, EnvConfig config, std::vector<SeatSpec> seats, SessionOptions options)
    : id_(std::move(id)), config_(std::move(config)), seats_(std::move(seats)), options_(options) {
  config_.check();
  const int n = config_.num_agents();
  if (static_cast<int>(seats_.size()) != n) {
    throw InvalidArgument("layout has " + std::to_string(n) + " agents but " + std::to_string(seats_.size()) +
                          " seats were given");
  }
  if (options_.tick_ms < 0 || options_.turn_timeout_ms < 0 || options_.grace_ms < 0) {
    throw InvalidArgument("timing options must be >= 0");
  }
  bool any_human = false;
  for (int a = 0; a < n; ++a) {
    const SeatSpec& s = seats_[static_cast<std::size_t>(a)];
    any_human = any_human || s.human;
    policies_.push_back(s.human ? nullptr : make_policy(s.policy));
    policy_rngs_.push_back(Rng(options_.seed).fork(0x5ea7ULL + static_cast<std::uint64_t>(a)));
  }
  if (!any_human) throw InvalidArgument("a session needs at least one human seat");
  connected_.assign(static_cast<std::size_t>(n), false);
  pending_.assign(static_cast<std::size_t>(n), std::nullopt);
  start_episode();
}

void Session::start_episode() {
  const std::uint64_t seed = episode_ == 0 ? options_.seed : Rng(options_.seed).fork(static_cast<std::uint64_t>(episode_)).next();
  state_ = reset(config_, seed);
  trajectory_ = Trajectory{};
  trajectory_.config = config_;
  trajectory_.config_digest = config_digest(config_);
  trajectory_.seed = seed;
  trajectory_.initial = state_;
  trajectory_.final_hash = state_hash(state_);
  score_ = 0.0;
  for (auto& p : pending_) p.reset();
  for (auto& p : policies_) {
    if (p) p->reset();
  }
  turn_started_ms_ = -1;
}

bool Session::connected(int seat) const {
  return seat >= 0 && seat < static_cast<int>(connected_.size()) && connected_[static_cast<std::size_t>(seat)];
}

bool Session::all_humans_connected() const {
  for (std::size_t a = 0; a < seats_.size(); ++a) {
    if (seats_[a].human && !connected_[a]) return false;
  }
  return true;
}

bool Session::all_humans_acted() const {
  for (std::size_t a = 0; a < seats_.size(); ++a) {
    if (seats_[a].human && !pending_[a]) return false;
  }
  return true;
}

Frame Session::frame_for(int seat) const {
  Frame f = make_frame(config_, state_, score_);
  if (options_.fog) apply_fog(f, seat);
  return f;
}

Json Session::frame_message(int seat, const std::vector<Event>& events) const {
  Json obs = Json::array();
  for (int a = 0; a < static_cast<int>(state_.agents.size()); ++a) {
    int cells = 0;
    for (int y = 0; y < state_.grid.height; ++y) {
      for (int x = 0; x < state_.grid.width; ++x) cells += visible(config_, state_, a, {x, y}) ? 1 : 0;
    }
    const AgentState& ag = state_.agents[static_cast<std::size_t>(a)];
    obs.push_back(Json{{"seat", a},
                       {"kind", seats_[static_cast<std::size_t>(a)].human ? "human" : seats_[static_cast<std::size_t>(a)].policy},
                       {"visible_cells", cells},
                       {"inventory", describe_item(ag.inventory, config_.num_ingredients())},
                       {"acted", pending_[static_cast<std::size_t>(a)].has_value()}});
  }
  Json ev = Json::array();
  for (const auto& e : events) ev.push_back(event_to_json(e));
  return Json{{"type", "frame"}, {"seat", seat},          {"status", std::string(to_string(status_))},
              {"episode", episode_}, {"score", score_},   {"frame", frame_to_json(frame_for(seat))},
              {"obs", std::move(obs)}, {"events", std::move(ev)}};
}

std::vector<Outgoing> Session::broadcast(const std::vector<Event>& events) const {
  std::vector<Outgoing> out;
  for (int a = 0; a < static_cast<int>(seats_.size()); ++a) {
    if (connected(a)) out.push_back({a, frame_message(a, events)});
  }
  return out;
}

std::vector<Outgoing> Session::error_to(int seat, const std::string& reason) const {
  return {{seat, Json{{"type", "error"}, {"reason", reason}}}};
}

Json Session::info() const {
  Json seats = Json::array();
  for (std::size_t a = 0; a < seats_.size(); ++a) {
    seats.push_back(Json{{"seat", a},
                         {"kind", seats_[a].human ? "human" : "policy"},
                         {"policy", seats_[a].human ? Json(nullptr) : Json(seats_[a].policy)},
                         {"connected", static_cast<bool>(connected_[a])}});
  }
  return Json{{"id", id_},
              {"status", std::string(to_string(status_))},
              {"layout", config_.layout->name},
              {"episode", episode_},
              {"t", state_.t},
              {"max_steps", config_.max_steps},
              {"score", score_},
              {"fog", options_.fog},
              {"tick_ms", options_.tick_ms},
              {"turn_timeout_ms", options_.turn_timeout_ms},
              {"seats", std::move(seats)},
              {"config_digest", trajectory_.config_digest},
              {"state_hash", hex64(state_hash(state_))}};
}

std::vector<Outgoing> Session::connect(int seat, std::int64_t now_ms) {
  if (seat < 0 || seat >= static_cast<int>(seats_.size())) throw InvalidArgument("no seat " + std::to_string(seat));
  if (!seats_[static_cast<std::size_t>(seat)].human) throw InvalidArgument("seat " + std::to_string(seat) + " is a policy seat");
  if (connected(seat)) throw InvalidArgument("seat " + std::to_string(seat) + " is already taken");
  if (status_ == SessionStatus::Done) throw InvalidArgument("session is closed");
  connected_[static_cast<std::size_t>(seat)] = true;
  if (all_humans_connected()) {
    if (status_ == SessionStatus::Waiting || status_ == SessionStatus::Paused) {
      status_ = SessionStatus::Running;
      paused_at_ms_ = -1;
      turn_started_ms_ = now_ms;
      if (options_.tick_ms > 0) next_tick_ms_ = now_ms + options_.tick_ms;
    }
    return broadcast({});
  }
  return {{seat, frame_message(seat, {})}};
}

std::vector<Outgoing> Session::disconnect(int seat, std::int64_t now_ms) {
  if (!connected(seat)) return {};
  connected_[static_cast<std::size_t>(seat)] = false;
  if (status_ == SessionStatus::Running) {
    status_ = SessionStatus::Paused;
    paused_at_ms_ = now_ms;
  }
  return broadcast({});
}

std::vector<Outgoing> Session::advance(std::int64_t now_ms) {
  const int n = static_cast<int>(seats_.size());
  std::vector<Action> actions(static_cast<std::size_t>(n), Action::Stay);
  for (int a = 0; a < n; ++a) {
    const auto i = static_cast<std::size_t>(a);
    if (seats_[i].human) {
      actions[i] = pending_[i].value_or(Action::Stay);
    } else {
      const ObsTensor obs = observe(config_, state_, a);
      actions[i] = policies_[i]->act(PolicyInput{config_, state_, obs, a}, policy_rngs_[i]);
    }
  }
  StepOutcome out = step_inplace(config_, state_, actions);
  score_ += out.rewards.empty() ? 0.0 : out.rewards.front();
  trajectory_.steps.push_back({actions, out.rewards, out.shaped, out.events, state_hash(state_)});
  trajectory_.final_hash = state_hash(state_);
  for (auto& p : pending_) p.reset();
  turn_started_ms_ = now_ms;
  auto msgs = broadcast(out.events);
  if (state_.t >= config_.max_steps) {
    status_ = SessionStatus::Done;
    for (int a = 0; a < n; ++a) {
      if (connected(a)) msgs.push_back({a, Json{{"type", "done"}, {"score", score_}, {"episode", episode_}}});
    }
  }
  return msgs;
}

std::vector<Outgoing> Session::handle(int seat, const std::string& text, std::int64_t now_ms) {
  if (!connected(seat)) return {};
  Json msg;
  try {
    msg = Json::parse(text);
  } catch (const nlohmann::json::exception&) {
    return error_to(seat, "malformed message");
  }
  if (!msg.is_object() || !msg.contains("type") || !msg["type"].is_string()) {
    return error_to(seat, "message needs a string \"type\"");
  }
  const std::string type = msg["type"].get<std::string>();
  if (type == "reset") {
    if (status_ == SessionStatus::Paused || status_ == SessionStatus::Waiting) return error_to(seat, "session not running");
    ++episode_;
    start_episode();
    status_ = all_humans_connected() ? SessionStatus::Running : SessionStatus::Paused;
    turn_started_ms_ = now_ms;
    if (options_.tick_ms > 0) next_tick_ms_ = now_ms + options_.tick_ms;
    return broadcast({});
  }
  if (type != "act") return error_to(seat, "unknown message type '" + type + "'");
  if (!msg.contains("action") || !msg["action"].is_string()) return error_to(seat, "act needs a string \"action\"");
  Action action;
  try {
    action = parse_action(msg["action"].get<std::string>());
  } catch (const Error& e) {
    return error_to(seat, e.what());
  }
  switch (status_) {
    case SessionStatus::Waiting: return error_to(seat, "waiting for players");
    case SessionStatus::Paused: return error_to(seat, "session paused");
    case SessionStatus::Done: return error_to(seat, "episode over");
    case SessionStatus::Running: break;
  }
  auto& slot = pending_[static_cast<std::size_t>(seat)];
  if (slot) return error_to(seat, "awaiting tick");
  slot = action;
  if (options_.tick_ms == 0 && all_humans_acted()) return advance(now_ms);
  return {};
}

std::vector<Outgoing> Session::poll(std::int64_t now_ms) {
  if (status_ == SessionStatus::Paused && paused_at_ms_ >= 0 && now_ms - paused_at_ms_ >= options_.grace_ms) {
    status_ = SessionStatus::Done;
    std::vector<Outgoing> msgs;
    for (int a = 0; a < static_cast<int>(seats_.size()); ++a) {
      if (connected(a)) msgs.push_back({a, Json{{"type", "done"}, {"score", score_}, {"episode", episode_}}});
    }
    return msgs;
  }
  if (status_ != SessionStatus::Running) return {};
  if (options_.tick_ms > 0) {
    if (now_ms < next_tick_ms_) return {};
    next_tick_ms_ += options_.tick_ms;
    if (next_tick_ms_ <= now_ms) next_tick_ms_ = now_ms + options_.tick_ms;
    return advance(now_ms);
  }
  bool any_pending = false;
  for (const auto& p : pending_) any_pending = any_pending || p.has_value();
  if (options_.turn_timeout_ms > 0 && turn_started_ms_ >= 0 && now_ms - turn_started_ms_ >= options_.turn_timeout_ms &&
      any_pending) {
    return advance(now_ms);
  }
  return {};
}

// ---------------------------------------------------------------- manager

SessionManager::SessionManager(std::string replay_dir) : replay_dir_(std::move(replay_dir)) {}

Json SessionManager::layouts_json() {
  Json out = Json::array();
  for (const auto& name : builtin_names()) {
    const LayoutPtr l = builtin_ptr(name);
    Json recipes = Json::array();
    for (const auto& r : l->possible_recipes) recipes.push_back(r.to_string());
    out.push_back(Json{{"name", name},
                       {"width", l->width},
                       {"height", l->height},
                       {"agents", l->num_agents()},
                       {"ingredients", l->num_ingredients},
                       {"recipes", std::move(recipes)},
                       {"text", serialize_layout(*l)}});
  }
  return out;
}

Json SessionManager::schema_json() {
  return Json{{"frame", frame_schema()},
              {"actions", {"up", "down", "left", "right", "stay", "interact"}},
              {"client_messages", {{{"type", "act"}, {"action", "up"}}, {{"type", "reset"}}}},
              {"server_messages", {"frame", "done", "error"}}};
}

Json SessionManager::create(const Json& request) {
  if (!request.is_object()) throw InvalidArgument("session request must be a JSON object");
  try {
    EnvConfig config;
    const std::string layout = request.value("layout", std::string("cramped_room"));
    config.layout = builtin_ptr(layout);
    if (request.contains("config")) {
      const Json& overrides = request.at("config");
      if (overrides.contains("layout")) throw InvalidArgument("set the layout with the top-level \"layout\" field");
      apply_config_overrides(config, overrides);
    }
    config.check();
    std::vector<SeatSpec> seats;
    if (request.contains("seats")) {
      for (const auto& s : request.at("seats")) seats.push_back(parse_seat(s.get<std::string>()));
    } else {
      seats.push_back({true, {}});
      for (int a = 1; a < config.num_agents(); ++a) seats.push_back({false, "greedy"});
    }
    SessionOptions opt;
    opt.seed = request.value("seed", std::uint64_t{0});
    opt.tick_ms = request.value("tick_ms", 0);
    opt.turn_timeout_ms = request.value("turn_timeout_ms", 0);
    opt.fog = request.value("fog", false);
    opt.grace_ms = request.value("grace_ms", 60000);

    std::string id;
    {
      std::lock_guard lock(mutex_);
      id = "s" + std::to_string(next_id_++);
    }
    auto entry = std::make_shared<Entry>();
    entry->session = std::make_unique<Session>(id, std::move(config), std::move(seats), opt);
    Json out{{"id", id}, {"schema", schema_json()}, {"frame", frame_to_json(entry->session->frame_for(0))},
             {"session", entry->session->info()}};
    {
      std::lock_guard lock(mutex_);
      sessions_[id] = std::move(entry);
    }
    return out;
  } catch (const nlohmann::json::exception& e) {
    throw InvalidArgument(std::string("bad session request: ") + e.what());
  }
}

std::shared_ptr<SessionManager::Entry> SessionManager::find(const std::string& id) const {
  std::lock_guard lock(mutex_);
  const auto it = sessions_.find(id);
  if (it == sessions_.end()) throw InvalidArgument("unknown session '" + id + "'");
  return it->second;
}

Json SessionManager::info(const std::string& id) const {
  auto e = find(id);
  std::lock_guard lock(e->mutex);
  return e->session->info();
}

std::string SessionManager::replay(const std::string& id) const {
  auto e = find(id);
  std::lock_guard lock(e->mutex);
  return replay_to_string(e->session->trajectory());
}

void SessionManager::save_finished(Entry& e) {
  if (replay_dir_.empty() || e.session->status() != SessionStatus::Done) return;
  if (e.saved_episodes > e.session->episode()) return;
  e.saved_episodes = e.session->episode() + 1;
  std::filesystem::create_directories(replay_dir_);
  const std::string path = replay_dir_ + "/" + e.session->id() + "_ep" + std::to_string(e.session->episode()) + ".jsonl";
  save_replay(e.session->trajectory(), path);
}

std::vector<Outgoing> SessionManager::connect(const std::string& id, int seat, std::int64_t now_ms) {
  auto e = find(id);
  std::lock_guard lock(e->mutex);
  return e->session->connect(seat, now_ms);
}

std::vector<Outgoing> SessionManager::disconnect(const std::string& id, int seat, std::int64_t now_ms) {
  auto e = find(id);
  std::lock_guard lock(e->mutex);
  return e->session->disconnect(seat, now_ms);
}

std::vector<Outgoing> SessionManager::handle(const std::string& id, int seat, const std::string& text,
                                             std::int64_t now_ms) {
  auto e = find(id);
  std::lock_guard lock(e->mutex);
  auto out = e->session->handle(seat, text, now_ms);
  save_finished(*e);
  return out;
}

std::vector<std::pair<std::string, Outgoing>> SessionManager::poll(std::int64_t now_ms) {
  std::vector<std::pair<std::string, std::shared_ptr<Entry>>> entries;
  {
    std::lock_guard lock(mutex_);
    entries.assign(sessions_.begin(), sessions_.end());
  }
  std::vector<std::pair<std::string, Outgoing>> out;
  for (auto& [id, e] : entries) {
    std::lock_guard lock(e->mutex);
    for (auto& m : e->session->poll(now_ms)) out.emplace_back(id, std::move(m));
    save_finished(*e);
  }
  return out;
}

}  // namespace ocv2
