#include "ocv2/button_game.hpp"

#include <cmath>
#include <string>

namespace ocv2::button_game {

void Config::check() const {
  if (n_buttons < 1) throw InvalidArgument("button game: n_buttons must be >= 1");
}

QTables QTables::zeros(const Config& config) {
  config.check();
  QTables q;
  q.alice.assign(2, std::vector<double>(static_cast<std::size_t>(config.n_buttons), 0.0));
  q.bob.assign(static_cast<std::size_t>(config.n_bulbs()), std::vector<double>(2, 0.0));
  return q;
}

Json QTables::to_json() const {
  return Json{{"kind", "tabular"}, {"parameters", Json{{"alice", alice}, {"bob", bob}}}};
}

QTables QTables::from_json(const Json& j) {
  try {
    QTables q;
    q.alice = j.at("parameters").at("alice").get<std::vector<std::vector<double>>>();
    q.bob = j.at("parameters").at("bob").get<std::vector<std::vector<double>>>();
    if (q.alice.size() != 2 || q.bob.size() != 2 * q.alice[0].size()) throw ParseError("button game tables: bad shape");
    return q;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("button game tables: ") + e.what());
  }
}

std::vector<int> argmax_set(const std::vector<double>& values) {
  std::vector<int> best;
  double top = -INFINITY;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (values[i] > top) {
      top = values[i];
      best.assign(1, static_cast<int>(i));
    } else if (values[i] == top) {
      best.push_back(static_cast<int>(i));
    }
  }
  return best;
}

int greedy_action(const std::vector<double>& values, Rng& rng) {
  const auto best = argmax_set(values);
  return best[rng.below(best.size())];
}

int bulb_for(const Config& config, int button, int pet) {
  if (button < 0 || button >= config.n_buttons) throw InvalidArgument("button game: button out of range");
  if (pet != 0 && pet != 1) throw InvalidArgument("button game: pet must be 0 or 1");
  return 2 * button + pet;
}

double play(const Config& config, int button, int pet, int guess) {
  bulb_for(config, button, pet);
  if (guess != 0 && guess != 1) throw InvalidArgument("button game: guess must be 0 or 1");
  return guess == pet ? config.reward_magnitude : -config.reward_magnitude;
}

double bg_play(const Config& config, const QTables& alice, const QTables& bob, int pet, Rng& rng) {
  const int button = greedy_action(alice.alice[static_cast<std::size_t>(pet)], rng);
  const int bulb = bulb_for(config, button, pet);
  const int guess = greedy_action(bob.bob[static_cast<std::size_t>(bulb)], rng);
  return play(config, button, pet, guess);
}

namespace {

int epsilon_greedy(const std::vector<double>& values, double epsilon, Rng& rng) {
  if (rng.uniform() < epsilon) return static_cast<int>(rng.below(values.size()));
  return greedy_action(values, rng);
}

}  // namespace

TrainResult train_iql(const Config& config, std::uint64_t seed, const TrainOptions& options) {
  TrainResult out{QTables::zeros(config), 0.0};
  QTables& q = out.tables;
  Rng rng(seed);
  const int episodes = std::max(options.episodes, 1);
  double total = 0.0;
  for (int e = 0; e < episodes; ++e) {
    const double frac = episodes > 1 ? static_cast<double>(e) / (episodes - 1) : 0.0;
    const double eps = options.epsilon_start + (options.epsilon_end - options.epsilon_start) * frac;
    const int pet = static_cast<int>(rng.below(2));
    auto& alice_row = q.alice[static_cast<std::size_t>(pet)];
    const int button = epsilon_greedy(alice_row, eps, rng);
    const int bulb = 2 * button + pet;
    auto& bob_row = q.bob[static_cast<std::size_t>(bulb)];
    const int guess = epsilon_greedy(bob_row, eps, rng);
    const double r = play(config, button, pet, guess);
    // One-step episodes: the Q-target is the reward itself.
    alice_row[static_cast<std::size_t>(button)] += options.alpha * (r - alice_row[static_cast<std::size_t>(button)]);
    bob_row[static_cast<std::size_t>(guess)] += options.alpha * (r - bob_row[static_cast<std::size_t>(guess)]);
    total += r;
  }
  out.mean_training_reward = total / episodes;
  return out;
}

QTables train_br_uniform(const Config& config, std::uint64_t seed, int episodes, double alpha) {
  QTables q = QTables::zeros(config);
  Rng rng(seed);
  std::vector<int> visits(static_cast<std::size_t>(config.n_bulbs()), 0);
  for (int e = 0; e < episodes; ++e) {
    const int pet = static_cast<int>(rng.below(2));
    const int button = static_cast<int>(rng.below(static_cast<std::uint64_t>(config.n_buttons)));
    const int bulb = 2 * button + pet;
    ++visits[static_cast<std::size_t>(bulb)];
    // Bob explores uniformly; his greedy policy is read off afterwards.
    const int guess = static_cast<int>(rng.below(2));
    auto& row = q.bob[static_cast<std::size_t>(bulb)];
    row[static_cast<std::size_t>(guess)] += alpha * (play(config, button, pet, guess) - row[static_cast<std::size_t>(guess)]);
  }
  std::string missing;
  for (std::size_t b = 0; b < visits.size(); ++b) {
    if (visits[b] == 0) missing += (missing.empty() ? "" : ", ") + std::to_string(b);
  }
  if (!missing.empty()) {
    throw Error("train_br_uniform: bulbs never observed after " + std::to_string(episodes) + " episodes: " + missing);
  }
  return q;
}

double expected_reward(const Config& config, const QTables& alice, const QTables& bob) {
  double total = 0.0;
  for (int pet = 0; pet < 2; ++pet) {
    const auto buttons = argmax_set(alice.alice[static_cast<std::size_t>(pet)]);
    double pet_value = 0.0;
    for (int button : buttons) {
      const int bulb = bulb_for(config, button, pet);
      const auto guesses = argmax_set(bob.bob[static_cast<std::size_t>(bulb)]);
      double v = 0.0;
      for (int g : guesses) v += g == pet ? config.reward_magnitude : -config.reward_magnitude;
      pet_value += v / static_cast<double>(guesses.size());
    }
    total += pet_value / static_cast<double>(buttons.size());
  }
  return total / 2.0;
}

std::vector<std::vector<double>> crossplay_matrix(const Config& config, const std::vector<QTables>& population) {
  std::vector<std::vector<double>> m(population.size(), std::vector<double>(population.size(), 0.0));
  for (std::size_t i = 0; i < population.size(); ++i) {
    for (std::size_t j = 0; j < population.size(); ++j) m[i][j] = expected_reward(config, population[i], population[j]);
  }
  return m;
}

std::pair<double, double> monte_carlo_reward(const Config& config, const QTables& alice, const QTables& bob,
                                             int rounds, std::uint64_t seed) {
  Rng rng(seed);
  double sum = 0.0, sum_sq = 0.0;
  for (int r = 0; r < rounds; ++r) {
    const double v = bg_play(config, alice, bob, static_cast<int>(rng.below(2)), rng);
    sum += v;
    sum_sq += v * v;
  }
  const double mean = sum / rounds;
  const double var = std::max(0.0, sum_sq / rounds - mean * mean);
  return {mean, std::sqrt(var / rounds)};
}

Experiment run_experiment(const Config& config, int seeds, std::uint64_t base_seed, const TrainOptions& options) {
  config.check();
  if (seeds < 1) throw InvalidArgument("button game: need at least one seed");
  std::vector<QTables> population;
  Experiment ex;
  for (int s = 0; s < seeds; ++s) {
    population.push_back(train_iql(config, Rng(base_seed).fork(static_cast<std::uint64_t>(s)).next(), options).tables);
    ex.labels.push_back("SP" + std::to_string(s));
  }
  // The BR pair: uniform Alice (all-zero table, so every button ties) and the BR Bob.
  QTables br = train_br_uniform(config, Rng(base_seed).fork(0xb5ULL).next(), options.episodes);
  br.alice = QTables::zeros(config).alice;
  population.push_back(std::move(br));
  ex.labels.push_back("BR");

  ex.matrix = crossplay_matrix(config, population);
  const std::size_t n = static_cast<std::size_t>(seeds);
  double sp = 0.0, xp = 0.0;
  ex.br_min = INFINITY;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) (i == j ? sp : xp) += ex.matrix[i][j];
    ex.br_min = std::min(ex.br_min, ex.matrix[i][n]);
  }
  ex.sp_mean = sp / static_cast<double>(n);
  ex.xp_mean = n > 1 ? xp / static_cast<double>(n * (n - 1)) : 0.0;
  return ex;
}

}  // namespace ocv2::button_game
