#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "ocv2/eval.hpp"
#include "ocv2/render.hpp"

namespace ocv2 {

enum class SessionStatus { Waiting, Running, Paused, Done };
std::string_view to_string(SessionStatus s);

struct SeatSpec {
  bool human = false;
  std::string policy;  // when not human
};

/// "human" or a policy name.
SeatSpec parse_seat(const std::string& text);

struct SessionOptions {
  std::uint64_t seed = 0;
  /// Fixed tick period; 0 steps as soon as every human seat has acted.
  int tick_ms = 0;
  /// Missing human actions become Stay after this long; 0 waits forever.
  int turn_timeout_ms = 0;
  /// Frames sent to a human seat are masked to that seat's view radius.
  bool fog = false;
  /// A paused session closes when nobody reconnects within this window.
  int grace_ms = 60000;
};

/// Message for one human seat.
struct Outgoing {
  int seat = 0;
  Json message;
};

/// One environment driven in lock-step by its human seats. Not thread-safe;
/// SessionManager serialises access.
class Session {
 public:
  Session(std::string id, EnvConfig config, std::vector<SeatSpec> seats, SessionOptions options);

  const std::string& id() const { return id_; }
  SessionStatus status() const { return status_; }
  const GameState& state() const { return state_; }
  const EnvConfig& config() const { return config_; }
  double score() const { return score_; }
  int episode() const { return episode_; }
  const Trajectory& trajectory() const { return trajectory_; }
  const std::vector<SeatSpec>& seats() const { return seats_; }
  bool connected(int seat) const;

  /// Throws InvalidArgument for a policy seat, a bad index or a seat in use.
  std::vector<Outgoing> connect(int seat, std::int64_t now_ms);
  std::vector<Outgoing> disconnect(int seat, std::int64_t now_ms);
  /// Parses one client message. Bad messages yield an error to the sender
  /// and leave the state untouched.
  std::vector<Outgoing> handle(int seat, const std::string& text, std::int64_t now_ms);
  /// Tick clock, turn timeouts and grace expiry.
  std::vector<Outgoing> poll(std::int64_t now_ms);

  Frame frame_for(int seat) const;
  Json frame_message(int seat, const std::vector<Event>& events) const;
  Json info() const;

 private:
  void start_episode();
  bool all_humans_connected() const;
  bool all_humans_acted() const;
  std::vector<Outgoing> advance(std::int64_t now_ms);
  std::vector<Outgoing> broadcast(const std::vector<Event>& events) const;
  std::vector<Outgoing> error_to(int seat, const std::string& reason) const;

  std::string id_;
  EnvConfig config_;
  std::vector<SeatSpec> seats_;
  SessionOptions options_;
  std::vector<std::unique_ptr<Policy>> policies_;  // null for human seats
  std::vector<Rng> policy_rngs_;
  std::vector<bool> connected_;
  std::vector<std::optional<Action>> pending_;
  GameState state_;
  Trajectory trajectory_;
  double score_ = 0.0;
  int episode_ = 0;
  SessionStatus status_ = SessionStatus::Waiting;
  std::int64_t turn_started_ms_ = -1;
  std::int64_t next_tick_ms_ = -1;
  std::int64_t paused_at_ms_ = -1;
};

/// Thread-safe registry of isolated sessions.
class SessionManager {
 public:
  /// `replay_dir`, when set, receives one replay file per finished episode.
  explicit SessionManager(std::string replay_dir = {});

  /// Request: {"layout": name, "seats": ["human", "greedy"], "config": {...},
  /// "seed", "tick_ms", "turn_timeout_ms", "fog"}. Returns {id, schema, frame}.
  Json create(const Json& request);
  /// Throws InvalidArgument for an unknown id.
  Json info(const std::string& id) const;
  std::string replay(const std::string& id) const;

  std::vector<Outgoing> connect(const std::string& id, int seat, std::int64_t now_ms);
  std::vector<Outgoing> disconnect(const std::string& id, int seat, std::int64_t now_ms);
  std::vector<Outgoing> handle(const std::string& id, int seat, const std::string& text, std::int64_t now_ms);
  /// Polls every session; keys are session ids.
  std::vector<std::pair<std::string, Outgoing>> poll(std::int64_t now_ms);

  static Json layouts_json();
  static Json schema_json();

 private:
  struct Entry {
    std::mutex mutex;
    std::unique_ptr<Session> session;
    int saved_episodes = 0;
  };
  std::shared_ptr<Entry> find(const std::string& id) const;
  void save_finished(Entry& e);

  std::string replay_dir_;
  mutable std::mutex mutex_;
  std::map<std::string, std::shared_ptr<Entry>> sessions_;
  std::uint64_t next_id_ = 1;
};

}  // namespace ocv2
