#include <benchmark/benchmark.h>

#include "ocv2/env.hpp"
#include "ocv2/eval.hpp"
#include "ocv2/observation.hpp"

using namespace ocv2;

namespace {

EnvConfig config(const std::string& name) {
  EnvConfig c;
  c.layout = builtin_ptr(name);
  return c;
}

void BM_Step(benchmark::State& st, const std::string& name) {
  const EnvConfig c = config(name);
  GameState s = reset(c, 0);
  Rng rng(1);
  std::vector<Action> a(s.agents.size());
  for (auto _ : st) {
    if (s.t >= c.max_steps) s = reset(c, rng.next());
    for (auto& x : a) x = kAllActions[rng.below(kNumActions)];
    benchmark::DoNotOptimize(step_inplace(c, s, a));
  }
  st.SetItemsProcessed(st.iterations());
}
BENCHMARK_CAPTURE(BM_Step, cramped_room, std::string("cramped_room"));
BENCHMARK_CAPTURE(BM_Step, counter_circuit, std::string("counter_circuit"));
BENCHMARK_CAPTURE(BM_Step, grounded_coord_ring, std::string("grounded_coord_ring"));

void BM_Observe(benchmark::State& st) {
  EnvConfig c = config("counter_circuit");
  c.view_radius = 2;
  const GameState s = reset(c, 0);
  for (auto _ : st) benchmark::DoNotOptimize(observe(c, s, 0));
}
BENCHMARK(BM_Observe);

void BM_GreedyRollout(benchmark::State& st) {
  const EnvConfig c = config("cramped_room");
  for (auto _ : st) {
    std::vector<std::unique_ptr<Policy>> seats;
    seats.push_back(make_policy("greedy"));
    seats.push_back(make_policy("greedy"));
    benchmark::DoNotOptimize(rollout(c, seats, 0).final_hash);
  }
}
BENCHMARK(BM_GreedyRollout)->Unit(benchmark::kMillisecond);

void BM_StepThreads(benchmark::State& st) {
  const EnvConfig c = config("cramped_room");
  GameState s = reset(c, static_cast<std::uint64_t>(st.thread_index()));
  Rng rng(static_cast<std::uint64_t>(st.thread_index()) + 7);
  std::vector<Action> a(2);
  for (auto _ : st) {
    if (s.t >= c.max_steps) s = reset(c, rng.next());
    for (auto& x : a) x = kAllActions[rng.below(kNumActions)];
    benchmark::DoNotOptimize(step_inplace(c, s, a));
  }
  st.SetItemsProcessed(st.iterations());
}
BENCHMARK(BM_StepThreads)->ThreadRange(1, 4)->UseRealTime();

}  // namespace
BENCHMARK_MAIN();
