#include "ocv2/eval.hpp"

#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <thread>

#include <unistd.h>

#include "ocv2/observation.hpp"

namespace ocv2 {

double Trajectory::total_reward() const {
  double total = 0.0;
  for (const auto& s : steps) total += s.rewards.empty() ? 0.0 : s.rewards.front();
  return total;
}

PolicySpec policy_spec(const std::string& name) {
  std::shared_ptr<const Policy> proto = make_policy(name);
  return {name, [proto] { return proto->clone(); }};
}

Trajectory rollout(const EnvConfig& config, std::vector<std::unique_ptr<Policy>>& policies, std::uint64_t seed,
                   const std::optional<GameState>& start_state, const StateVisitor& visit) {
  config.check();
  const int n = config.num_agents();
  if (static_cast<int>(policies.size()) != n) {
    throw InvalidArgument("rollout: " + std::to_string(policies.size()) + " policies for " + std::to_string(n) +
                          " agents");
  }
  Trajectory tr;
  tr.config = config;
  tr.config_digest = config_digest(config);
  tr.seed = seed;
  GameState s = start_state ? reset_to(config, *start_state) : reset(config, seed);
  tr.initial = s;

  std::vector<Rng> seat_rngs;
  for (int a = 0; a < n; ++a) seat_rngs.push_back(Rng(seed).fork(0x5ea7ULL + static_cast<std::uint64_t>(a)));
  for (auto& p : policies) p->reset();

  if (visit) visit(0, s);
  std::vector<Action> actions(static_cast<std::size_t>(n));
  tr.steps.reserve(static_cast<std::size_t>(config.max_steps));
  while (s.t < config.max_steps) {
    for (int a = 0; a < n; ++a) {
      const ObsTensor obs = observe(config, s, a);
      const PolicyInput in{config, s, obs, a};
      actions[static_cast<std::size_t>(a)] = policies[static_cast<std::size_t>(a)]->act(in, seat_rngs[static_cast<std::size_t>(a)]);
    }
    StepOutcome out = step_inplace(config, s, actions);
    tr.steps.push_back({actions, std::move(out.rewards), std::move(out.shaped), std::move(out.events), state_hash(s)});
    if (visit) visit(static_cast<int>(tr.steps.size()), s);
  }
  tr.final_hash = state_hash(s);
  return tr;
}

std::optional<std::size_t> first_divergence(const Trajectory& tr) {
  GameState s = tr.initial;
  for (std::size_t k = 0; k < tr.steps.size(); ++k) {
    try {
      step_inplace(tr.config, s, tr.steps[k].actions);
    } catch (const Error&) {
      return k;
    }
    if (state_hash(s) != tr.steps[k].state_hash) return k;
  }
  if (state_hash(s) != tr.final_hash) return tr.steps.size();
  return std::nullopt;
}

// ---------------------------------------------------------------- buffers

void StateBuffer::add(BufferEntry entry) {
  if (entry.step % kStride != 0) throw InvalidArgument("state buffer: step index must be a multiple of 10");
  entries_.push_back(std::move(entry));
}

std::size_t StateBuffer::sample_index(Rng& rng) const {
  if (entries_.empty()) throw InvalidArgument("state buffer: cannot sample from an empty buffer");
  return rng.below(entries_.size());
}

Json StateBuffer::to_json() const {
  Json states = Json::array();
  for (const auto& e : entries_) {
    states.push_back(Json{{"policy_a", e.policy_a}, {"policy_b", e.policy_b}, {"rollout", e.rollout},
                          {"step", e.step}, {"state", state_to_json(e.state)}});
  }
  return Json{{"stride", kStride}, {"states", std::move(states)}};
}

StateBuffer StateBuffer::from_json(const Json& j) {
  StateBuffer b;
  try {
    for (const auto& e : j.at("states")) {
      b.add({state_from_json(e.at("state")), e.at("policy_a").get<int>(), e.at("policy_b").get<int>(),
             e.at("rollout").get<int>(), e.at("step").get<int>()});
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("state buffer: ") + e.what());
  }
  return b;
}

void StateBuffer::save(const std::string& path) const { write_file_atomic(path, to_json().dump() + "\n"); }

std::size_t expected_buffer_size(std::size_t policies, std::size_t rollouts, int horizon) {
  return policies * policies * rollouts * static_cast<std::size_t>((horizon + StateBuffer::kStride) / StateBuffer::kStride);
}

std::uint64_t episode_seed(std::uint64_t seed, std::uint64_t i, std::uint64_t j, std::uint64_t e) {
  std::uint64_t h = Rng::mix(seed ^ 0x6f63763265706973ULL);
  h = Rng::mix(h ^ (i + 1));
  h = Rng::mix(h ^ ((j + 1) << 20));
  return Rng::mix(h ^ ((e + 1) << 40));
}

void parallel_for(std::size_t count, int jobs, const std::function<void(std::size_t)>& fn) {
  const std::size_t workers = std::min<std::size_t>(count, static_cast<std::size_t>(std::max(jobs, 1)));
  if (workers <= 1) {
    for (std::size_t k = 0; k < count; ++k) fn(k);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> threads;
  for (std::size_t w = 0; w < workers; ++w) {
    threads.emplace_back([&] {
      for (std::size_t k = next++; k < count; k = next++) {
        try {
          fn(k);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& t : threads) t.join();
  if (failure) std::rethrow_exception(failure);
}

namespace {

std::vector<std::unique_ptr<Policy>> seat_policies(const EnvConfig& config, const PolicySpec& first,
                                                   const PolicySpec& rest) {
  std::vector<std::unique_ptr<Policy>> seats;
  seats.push_back(first.make());
  for (int a = 1; a < config.num_agents(); ++a) seats.push_back(rest.make());
  return seats;
}

}  // namespace

StateBuffer collect_buffer(const EnvConfig& config, const std::vector<PolicySpec>& population, int rollouts,
                           std::uint64_t seed, int jobs) {
  config.check();
  if (population.empty()) throw InvalidArgument("collect_buffer: empty population");
  if (rollouts < 1) throw InvalidArgument("collect_buffer: rollouts must be >= 1");
  const std::size_t p = population.size();
  const std::size_t tasks = p * p * static_cast<std::size_t>(rollouts);
  std::vector<std::vector<BufferEntry>> per_task(tasks);
  parallel_for(tasks, jobs, [&](std::size_t k) {
    const std::size_t i = k / (p * static_cast<std::size_t>(rollouts));
    const std::size_t j = (k / static_cast<std::size_t>(rollouts)) % p;
    const int r = static_cast<int>(k % static_cast<std::size_t>(rollouts));
    auto seats = seat_policies(config, population[i], population[j]);
    rollout(config, seats, episode_seed(seed, i, j, static_cast<std::uint64_t>(r)), std::nullopt,
            [&](int step, const GameState& s) {
              if (step % StateBuffer::kStride == 0) {
                per_task[k].push_back({s, static_cast<int>(i), static_cast<int>(j), r, step});
              }
            });
  });
  StateBuffer buffer;
  for (auto& entries : per_task) {
    for (auto& e : entries) buffer.add(std::move(e));
  }
  return buffer;
}

std::vector<std::size_t> state_augmented_selfplay(const EnvConfig& config,
                                                  std::vector<std::unique_ptr<Policy>>& population, int iterations,
                                                  int rollouts, std::uint64_t seed, const Trainer& trainer) {
  std::vector<std::size_t> sizes;
  for (int k = 0; k < iterations; ++k) {
    std::vector<PolicySpec> specs;
    for (std::size_t i = 0; i < population.size(); ++i) {
      std::shared_ptr<const Policy> snapshot = population[i]->clone();
      specs.push_back({"policy" + std::to_string(i), [snapshot] { return snapshot->clone(); }});
    }
    const Rng iteration_rng = Rng(seed).fork(static_cast<std::uint64_t>(k));
    const StateBuffer buffer = collect_buffer(config, specs, rollouts, iteration_rng.fork(1).next());
    sizes.push_back(buffer.size());
    for (std::size_t i = 0; i < population.size(); ++i) {
      const std::function<GameState(Rng&)> sampler = [&](Rng& rng) { return reset_to(config, buffer.sample(rng)); };
      if (trainer) trainer(static_cast<int>(i), *population[i], sampler);
    }
  }
  return sizes;
}

// ---------------------------------------------------------------- cross-play

namespace {

std::pair<double, double> mean_std(const std::vector<double>& v) {
  if (v.empty()) return {std::numeric_limits<double>::quiet_NaN(), std::numeric_limits<double>::quiet_NaN()};
  double sum = 0.0;
  for (double x : v) sum += x;
  const double mean = sum / static_cast<double>(v.size());
  double sq = 0.0;
  for (double x : v) sq += (x - mean) * (x - mean);
  return {mean, std::sqrt(sq / static_cast<double>(v.size()))};
}

Json number_or_null(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

}  // namespace

void summarize(CrossPlayMatrix& m) {
  const std::size_t p = m.cells.size();
  std::vector<double> sp, xp;
  for (std::size_t i = 0; i < p; ++i) {
    sp.push_back(m.cells[i][i].mean);
    for (std::size_t j = 0; j < p; ++j) {
      if (i == j) continue;
      if (!m.unordered_xp) {
        xp.push_back(m.cells[i][j].mean);
      } else if (i < j) {
        xp.push_back(0.5 * (m.cells[i][j].mean + m.cells[j][i].mean));
      }
    }
  }
  std::tie(m.sp_mean, m.sp_std) = mean_std(sp);
  std::tie(m.xp_mean, m.xp_std) = mean_std(xp);
  m.gap = m.sp_mean - m.xp_mean;
}

CrossPlayMatrix crossplay(const EnvConfig& config, const std::vector<PolicySpec>& population, std::uint64_t seed,
                          const CrossPlayOptions& options) {
  config.check();
  if (population.empty()) throw InvalidArgument("crossplay: empty population");
  if (options.episodes < 1) throw InvalidArgument("crossplay: episodes must be >= 1");
  const std::size_t p = population.size();
  const std::size_t e = static_cast<std::size_t>(options.episodes);
  std::vector<double> returns(p * p * e, 0.0);
  parallel_for(returns.size(), options.jobs, [&](std::size_t k) {
    const std::size_t i = k / (p * e), j = (k / e) % p, ep = k % e;
    auto seats = seat_policies(config, population[i], population[j]);
    returns[k] = rollout(config, seats, episode_seed(seed, i, j, ep)).total_reward();
  });

  CrossPlayMatrix m;
  m.unordered_xp = options.unordered_xp;
  for (const auto& spec : population) m.names.push_back(spec.name);
  m.cells.assign(p, std::vector<CellStats>(p));
  for (std::size_t i = 0; i < p; ++i) {
    for (std::size_t j = 0; j < p; ++j) {
      const auto first = returns.begin() + static_cast<std::ptrdiff_t>((i * p + j) * e);
      const auto [mean, sd] = mean_std(std::vector<double>(first, first + static_cast<std::ptrdiff_t>(e)));
      m.cells[i][j] = {mean, sd, options.episodes};
    }
  }
  summarize(m);
  return m;
}

std::string CrossPlayMatrix::to_csv() const {
  std::ostringstream os;
  os.precision(17);
  os << "agent0\\agent1";
  for (const auto& n : names) os << ',' << n;
  os << '\n';
  for (std::size_t i = 0; i < cells.size(); ++i) {
    os << names[i];
    for (const auto& c : cells[i]) os << ',' << c.mean;
    os << '\n';
  }
  return os.str();
}

Json CrossPlayMatrix::to_json() const {
  Json mean = Json::array(), sd = Json::array();
  for (const auto& row : cells) {
    Json mr = Json::array(), sr = Json::array();
    for (const auto& c : row) {
      mr.push_back(c.mean);
      sr.push_back(c.std);
    }
    mean.push_back(std::move(mr));
    sd.push_back(std::move(sr));
  }
  return Json{{"names", names},
              {"episodes_per_cell", cells.empty() ? 0 : cells[0][0].episodes},
              {"mean", std::move(mean)},
              {"std", std::move(sd)},
              {"stats",
               Json{{"sp_mean", number_or_null(sp_mean)},
                    {"sp_std", number_or_null(sp_std)},
                    {"xp_mean", number_or_null(xp_mean)},
                    {"xp_std", number_or_null(xp_std)},
                    {"gap", number_or_null(gap)},
                    {"xp_pairs", unordered_xp ? "unordered" : "ordered"}}}};
}

void write_file_atomic(const std::string& path, const std::string& content) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  const fs::path tmp = target.string() + ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw InvalidArgument("cannot write '" + path + "'");
    out << content;
    out.flush();
    if (!out) {
      std::error_code ec;
      fs::remove(tmp, ec);
      throw InvalidArgument("failed writing '" + path + "'");
    }
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw InvalidArgument("cannot move output into place at '" + path + "'");
  }
}

}  // namespace ocv2
