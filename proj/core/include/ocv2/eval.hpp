#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "ocv2/env.hpp"
#include "ocv2/policy.hpp"
#include "ocv2/serialize.hpp"

namespace ocv2 {

struct TrajectoryStep {
  std::vector<Action> actions;
  std::vector<double> rewards;
  std::vector<double> shaped;
  std::vector<Event> events;
  std::uint64_t state_hash = 0;  // hash of the state after this step
};

struct Trajectory {
  EnvConfig config;
  std::string config_digest;
  std::uint64_t seed = 0;
  GameState initial;
  std::vector<TrajectoryStep> steps;
  std::uint64_t final_hash = 0;

  std::size_t size() const { return steps.size(); }
  /// Sum of the common delivery reward over the episode.
  double total_reward() const;
};

/// Policy seats are built from prototypes so every rollout starts fresh.
using PolicyFactory = std::function<std::unique_ptr<Policy>()>;

struct PolicySpec {
  std::string name;
  PolicyFactory make;
};

/// "random", "greedy" or a policy JSON path.
PolicySpec policy_spec(const std::string& name);

/// Observer for every state visited, including the start state.
using StateVisitor = std::function<void(int step_index, const GameState& state)>;

/// Runs one episode to max_steps. Each seat sees only its own observation;
/// policy randomness is forked from `seed` per seat. Throws InvalidArgument
/// on a policy count mismatch or an invalid start state.
Trajectory rollout(const EnvConfig& config, std::vector<std::unique_ptr<Policy>>& policies, std::uint64_t seed,
                   const std::optional<GameState>& start_state = std::nullopt, const StateVisitor& visit = {});

/// Re-simulates the trajectory; returns the first step index whose state
/// hash diverges, or nullopt when every hash matches.
std::optional<std::size_t> first_divergence(const Trajectory& trajectory);

struct BufferEntry {
  GameState state;
  int policy_a = 0;
  int policy_b = 0;
  int rollout = 0;
  int step = 0;  // always a multiple of the stride
};

/// Start-state buffer for state-augmented self-play.
class StateBuffer {
 public:
  static constexpr int kStride = 10;

  void add(BufferEntry entry);
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  const BufferEntry& operator[](std::size_t i) const { return entries_[i]; }
  const std::vector<BufferEntry>& entries() const { return entries_; }
  /// Uniform draw; throws InvalidArgument on an empty buffer.
  std::size_t sample_index(Rng& rng) const;
  const GameState& sample(Rng& rng) const { return entries_[sample_index(rng)].state; }

  Json to_json() const;
  static StateBuffer from_json(const Json& j);
  void save(const std::string& path) const;

 private:
  std::vector<BufferEntry> entries_;
};

/// Expected buffer size: P^2 * R * ceil((T + 1) / 10).
std::size_t expected_buffer_size(std::size_t policies, std::size_t rollouts, int horizon);

/// Rolls out every ordered pair R times and stores every tenth state
/// (steps 0, 10, 20, ...) with provenance.
StateBuffer collect_buffer(const EnvConfig& config, const std::vector<PolicySpec>& population, int rollouts,
                           std::uint64_t seed, int jobs = 1);

/// Slot for a learner in the state-augmented loop: receives the policy index,
/// the mutable policy and a sampler of start states.
using Trainer = std::function<void(int policy_index, Policy& policy, const std::function<GameState(Rng&)>& sample_start)>;

/// I iterations of: collect a fresh buffer from all ordered pairs, then call
/// the trainer once per policy with starts sampled uniformly from it.
/// Returns the buffer sizes per iteration.
std::vector<std::size_t> state_augmented_selfplay(const EnvConfig& config,
                                                  std::vector<std::unique_ptr<Policy>>& population, int iterations,
                                                  int rollouts, std::uint64_t seed, const Trainer& trainer);

struct CellStats {
  double mean = 0.0;
  double std = 0.0;
  int episodes = 0;
};

struct CrossPlayMatrix {
  std::vector<std::string> names;
  std::vector<std::vector<CellStats>> cells;  // [agent 0 policy][agent 1 policy]
  double sp_mean = 0.0;
  double sp_std = 0.0;
  double xp_mean = 0.0;
  double xp_std = 0.0;
  double gap = 0.0;
  bool unordered_xp = false;

  std::string to_csv() const;
  Json to_json() const;
};

struct CrossPlayOptions {
  int episodes = 500;
  int jobs = 1;
  /// Aggregate XP over unordered pairs (mean of (i,j) and (j,i)) instead of ordered ones.
  bool unordered_xp = false;
};

/// Cell (i, j) averages episodes with policy i in seat 0 and j in seat 1.
/// Episode e of cell (i, j) uses a seed derived from (seed, i, j, e) only,
/// so results do not depend on `jobs`.
CrossPlayMatrix crossplay(const EnvConfig& config, const std::vector<PolicySpec>& population, std::uint64_t seed,
                          const CrossPlayOptions& options = {});

/// Recomputes SP/XP/gap statistics from cell means.
void summarize(CrossPlayMatrix& m);

/// Seed of one episode, a pure function of its coordinates.
std::uint64_t episode_seed(std::uint64_t seed, std::uint64_t i, std::uint64_t j, std::uint64_t e);

/// Runs `fn(k)` for k in [0, count) on up to `jobs` threads.
void parallel_for(std::size_t count, int jobs, const std::function<void(std::size_t)>& fn);

// Replay files: JSON lines. A header line, one line per step, a footer.

void save_replay(const Trajectory& trajectory, const std::string& path);
std::string replay_to_string(const Trajectory& trajectory);
Trajectory load_replay(const std::string& path);
Trajectory replay_from_string(const std::string& text);

struct VerifyResult {
  bool ok = true;
  std::optional<std::size_t> divergent_step;
  std::string message;
};

/// Loads and re-simulates a replay file. Malformed step lines are reported
/// at their step index.
VerifyResult verify_replay(const std::string& path);
VerifyResult verify_replay_text(const std::string& text);

/// Writes `content` to `path` through a temporary file and rename, so a
/// failure never leaves a partial file.
void write_file_atomic(const std::string& path, const std::string& content);

}  // namespace ocv2
