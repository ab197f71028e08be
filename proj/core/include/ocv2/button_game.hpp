#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ocv2/rng.hpp"
#include "ocv2/serialize.hpp"

namespace ocv2::button_game {

// Alice sees a pet (0 = cat, 1 = dog) and presses one of N buttons; button
// a lights bulb 2a + pet. Bob sees the bulb and guesses the pet. Both get
// +reward for a correct guess and -reward otherwise.

struct Config {
  int n_buttons = 5;
  double reward_magnitude = 10.0;

  void check() const;
  int n_bulbs() const { return 2 * n_buttons; }
};

/// Tabular action values. alice[pet][button], bob[bulb][guess].
struct QTables {
  std::vector<std::vector<double>> alice;
  std::vector<std::vector<double>> bob;

  static QTables zeros(const Config& config);
  Json to_json() const;
  static QTables from_json(const Json& j);
};

struct TrainOptions {
  int episodes = 20000;
  double alpha = 0.1;
  double epsilon_start = 0.0;
  double epsilon_end = 0.0;
};

/// Argmax with uniformly random tie-breaking.
int greedy_action(const std::vector<double>& values, Rng& rng);

/// All indices attaining the maximum value.
std::vector<int> argmax_set(const std::vector<double>& values);

/// Lit bulb for a button press; throws InvalidArgument when out of range.
int bulb_for(const Config& config, int button, int pet);

/// One round of the game with explicit choices.
double play(const Config& config, int button, int pet, int guess);

/// One round with greedy (tie-uniform) choices from both tables.
double bg_play(const Config& config, const QTables& alice, const QTables& bob, int pet, Rng& rng);

struct TrainResult {
  QTables tables;
  double mean_training_reward = 0.0;
};

/// Independent one-step Q-learning of both players on the shared reward,
/// epsilon-greedy with a linear anneal from epsilon_start to epsilon_end.
TrainResult train_iql(const Config& config, std::uint64_t seed, const TrainOptions& options);

/// Bob trained against a uniformly random Alice. Throws Error listing the
/// bulbs that were never observed.
QTables train_br_uniform(const Config& config, std::uint64_t seed, int episodes, double alpha = 0.1);

/// Exact expected reward of Alice from `alice` with Bob from `bob`, over
/// both pets and uniform argmax tie-breaking on both sides.
double expected_reward(const Config& config, const QTables& alice, const QTables& bob);

/// Entry (i, j) pairs Alice of population[i] with Bob of population[j].
std::vector<std::vector<double>> crossplay_matrix(const Config& config, const std::vector<QTables>& population);

/// Monte-Carlo estimate of one pairing: mean and standard error.
std::pair<double, double> monte_carlo_reward(const Config& config, const QTables& alice, const QTables& bob,
                                             int rounds, std::uint64_t seed);

struct Experiment {
  std::vector<std::vector<double>> matrix;  // seeds SP pairs, then BR (uniform Alice + BR Bob)
  double sp_mean = 0.0;                     // diagonal over SP pairs
  double xp_mean = 0.0;                     // ordered off-diagonal over SP pairs
  double br_min = 0.0;                      // BR Bob against every SP Alice
  std::vector<std::string> labels;
};

/// The full experiment: `seeds` IQL self-play pairs plus the best response.
Experiment run_experiment(const Config& config, int seeds, std::uint64_t base_seed, const TrainOptions& options);

}  // namespace ocv2::button_game
