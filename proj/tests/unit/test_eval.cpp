#include <gtest/gtest.h>

#include <boost/math/distributions/chi_squared.hpp>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "ocv2/eval.hpp"
#include "ocv2/render.hpp"
#include "support.hpp"

using namespace ocv2;

namespace {

std::vector<std::unique_ptr<Policy>> seats(const std::string& a, const std::string& b) {
  std::vector<std::unique_ptr<Policy>> v;
  v.push_back(make_policy(a));
  v.push_back(make_policy(b));
  return v;
}

std::vector<PolicySpec> population(std::initializer_list<const char*> names) {
  std::vector<PolicySpec> p;
  for (const char* n : names) p.push_back(policy_spec(n));
  return p;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST(Rollout, DeterministicPerSeed) {
  const EnvConfig c = support::config_for("forced_coord");
  auto s1 = seats("random", "greedy");
  auto s2 = seats("random", "greedy");
  const Trajectory a = rollout(c, s1, 7);
  const Trajectory b = rollout(c, s2, 7);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t k = 0; k < a.size(); ++k) EXPECT_EQ(a.steps[k].state_hash, b.steps[k].state_hash);
  auto s3 = seats("random", "greedy");
  EXPECT_NE(rollout(c, s3, 8).final_hash, a.final_hash);
  EXPECT_FALSE(first_divergence(a).has_value());
}

TEST(Rollout, VisitsEveryState) {
  const EnvConfig c = support::config_for("cramped_room");
  auto s = seats("random", "random");
  std::vector<int> seen;
  const Trajectory tr = rollout(c, s, 1, std::nullopt, [&](int k, const GameState& g) {
    EXPECT_EQ(g.t, k);
    seen.push_back(k);
  });
  EXPECT_EQ(seen.size(), tr.size() + 1);
}

TEST(Rollout, StartStateAndErrors) {
  const EnvConfig c = support::config_for("cramped_room");
  const GameState mid = support::random_state(c, 2, 50);
  auto s = seats("greedy", "greedy");
  const Trajectory tr = rollout(c, s, 0, mid);
  // the injected state restarts the clock
  GameState rewound = mid;
  rewound.t = 0;
  EXPECT_EQ(tr.size(), static_cast<std::size_t>(c.max_steps));
  EXPECT_EQ(state_hash(tr.initial), state_hash(rewound));

  std::vector<std::unique_ptr<Policy>> one;
  one.push_back(make_policy("random"));
  EXPECT_THROW(rollout(c, one, 0), InvalidArgument);
}

TEST(Buffer, SizeAndProvenance) {
  const EnvConfig c = support::config_for("cramped_room");
  const StateBuffer buf = collect_buffer(c, population({"greedy", "random"}), 1, 3);
  ASSERT_EQ(buf.size(), expected_buffer_size(2, 1, c.max_steps));
  EXPECT_EQ(buf.size(), 164u);
  std::set<std::pair<int, int>> pairs;
  for (const auto& e : buf.entries()) {
    EXPECT_EQ(e.step % StateBuffer::kStride, 0);
    EXPECT_EQ(e.state.t, e.step);
    EXPECT_NO_THROW(check_state(c, e.state));
    pairs.insert({e.policy_a, e.policy_b});
  }
  EXPECT_EQ(pairs.size(), 4u);
  EXPECT_EQ(expected_buffer_size(3, 2, 400), 9u * 2u * 41u);
  EXPECT_EQ(expected_buffer_size(1, 1, 9), 1u);
  EXPECT_EQ(expected_buffer_size(1, 1, 10), 2u);
}

TEST(Buffer, JobsDoNotChangeContents) {
  const EnvConfig c = support::config_for("coord_ring");
  const StateBuffer a = collect_buffer(c, population({"greedy", "random"}), 2, 11, 1);
  const StateBuffer b = collect_buffer(c, population({"greedy", "random"}), 2, 11, 3);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t k = 0; k < a.size(); ++k) EXPECT_EQ(state_hash(a[k].state), state_hash(b[k].state));
}

TEST(Buffer, UniformSampling) {
  const EnvConfig c = support::config_for("cramped_room");
  const StateBuffer buf = collect_buffer(c, population({"greedy", "random"}), 1, 3);
  const std::size_t draws = buf.size() * 200;
  std::vector<int> hist(buf.size());
  Rng rng(99);
  for (std::size_t k = 0; k < draws; ++k) ++hist[buf.sample_index(rng)];
  const double expect = static_cast<double>(draws) / static_cast<double>(buf.size());
  double chi2 = 0;
  for (int h : hist) chi2 += (h - expect) * (h - expect) / expect;
  const boost::math::chi_squared dist(static_cast<double>(buf.size() - 1));
  EXPECT_GT(boost::math::cdf(boost::math::complement(dist, chi2)), 0.01);
  EXPECT_THROW(StateBuffer{}.sample_index(rng), InvalidArgument);
}

TEST(Buffer, SampledStatesResumeExactly) {
  const EnvConfig c = support::config_for("asymm_advantages");
  const StateBuffer buf = collect_buffer(c, population({"greedy", "random"}), 1, 5);
  Rng rng(1);
  for (int k = 0; k < 20; ++k) {
    const GameState& s = buf.sample(rng);
    const GameState r = reset_to(c, s);
    GameState rewound = s;
    rewound.t = 0;
    EXPECT_EQ(state_hash(r), state_hash(rewound));
    for (int a = 0; a < 2; ++a) EXPECT_EQ(observe(c, r, a).data, observe(c, s, a).data);
  }
}

TEST(Buffer, JsonRoundTrip) {
  const EnvConfig c = support::config_for("cramped_room");
  const StateBuffer buf = collect_buffer(c, population({"greedy"}), 1, 3);
  const StateBuffer back = StateBuffer::from_json(buf.to_json());
  ASSERT_EQ(back.size(), buf.size());
  for (std::size_t k = 0; k < buf.size(); ++k) {
    EXPECT_EQ(state_hash(back[k].state), state_hash(buf[k].state));
    EXPECT_EQ(back[k].step, buf[k].step);
  }
}

TEST(AugmentedSelfPlay, CallsTrainerPerPolicy) {
  const EnvConfig c = support::config_for("cramped_room");
  std::vector<std::unique_ptr<Policy>> pop;
  pop.push_back(make_policy("greedy"));
  pop.push_back(make_policy("random"));
  std::vector<int> calls;
  const auto sizes = state_augmented_selfplay(c, pop, 2, 1, 0, [&](int i, Policy&, const std::function<GameState(Rng&)>& sample) {
    calls.push_back(i);
    Rng rng(static_cast<std::uint64_t>(i));
    EXPECT_NO_THROW(check_state(c, sample(rng)));
  });
  EXPECT_EQ(sizes, (std::vector<std::size_t>{164, 164}));
  EXPECT_EQ(calls, (std::vector<int>{0, 1, 0, 1}));
}

TEST(CrossPlay, JobsInvariantAndStats) {
  const EnvConfig c = support::config_for("cramped_room");
  CrossPlayOptions o;
  o.episodes = 6;
  const CrossPlayMatrix a = crossplay(c, population({"greedy", "random"}), 5, o);
  o.jobs = 4;
  const CrossPlayMatrix b = crossplay(c, population({"greedy", "random"}), 5, o);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      EXPECT_EQ(a.cells[i][j].mean, b.cells[i][j].mean);
      EXPECT_EQ(a.cells[i][j].std, b.cells[i][j].std);
      EXPECT_EQ(a.cells[i][j].episodes, 6);
    }
  EXPECT_DOUBLE_EQ(a.sp_mean, (a.cells[0][0].mean + a.cells[1][1].mean) / 2);
  EXPECT_DOUBLE_EQ(a.xp_mean, (a.cells[0][1].mean + a.cells[1][0].mean) / 2);
  EXPECT_DOUBLE_EQ(a.gap, a.sp_mean - a.xp_mean);
  EXPECT_GE(a.cells[0][0].mean, 20.0);
}

TEST(CrossPlay, SummaryOracle) {
  CrossPlayMatrix m;
  m.names = {"a", "b", "c"};
  const double v[3][3] = {{10, 2, 4}, {6, 20, 0}, {8, 1, 30}};
  m.cells.assign(3, std::vector<CellStats>(3));
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) m.cells[i][j] = {v[i][j], 0.0, 1};
  summarize(m);
  EXPECT_DOUBLE_EQ(m.sp_mean, 20.0);
  EXPECT_DOUBLE_EQ(m.sp_std, std::sqrt(200.0 / 3.0));
  EXPECT_DOUBLE_EQ(m.xp_mean, 21.0 / 6.0);
  EXPECT_DOUBLE_EQ(m.gap, 20.0 - 3.5);
  m.unordered_xp = true;
  summarize(m);
  // pair means 4, 6, 0.5
  EXPECT_DOUBLE_EQ(m.xp_mean, 10.5 / 3.0);
  const double mu = 3.5;
  EXPECT_NEAR(m.xp_std, std::sqrt(((4 - mu) * (4 - mu) + (6 - mu) * (6 - mu) + (0.5 - mu) * (0.5 - mu)) / 3), 1e-12);
  const std::string csv = m.to_csv();
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "agent0\\agent1,a,b,c");
  EXPECT_EQ(m.to_json()["names"].size(), 3u);
}

TEST(CrossPlay, EpisodeSeedsAreDistinct) {
  std::set<std::uint64_t> seen;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j)
      for (int e = 0; e < 50; ++e) seen.insert(episode_seed(1, i, j, e));
  EXPECT_EQ(seen.size(), 800u);
  EXPECT_EQ(episode_seed(1, 2, 3, 4), episode_seed(1, 2, 3, 4));
}

TEST(ParallelFor, CoversRangeAndRethrows) {
  std::vector<std::atomic<int>> hits(100);
  parallel_for(100, 4, [&](std::size_t k) { ++hits[k]; });
  for (auto& h : hits) EXPECT_EQ(h.load(), 1);
  EXPECT_THROW(parallel_for(10, 3, [](std::size_t k) { if (k == 7) throw InvalidArgument("boom"); }), InvalidArgument);
}

TEST(Replay, RoundTripAndVerify) {
  const EnvConfig c = support::config_for("counter_circuit");
  auto s = seats("greedy", "random");
  const Trajectory tr = rollout(c, s, 42);
  const std::string text = replay_to_string(tr);
  const Trajectory back = replay_from_string(text);
  EXPECT_EQ(back.size(), tr.size());
  EXPECT_EQ(back.final_hash, tr.final_hash);
  EXPECT_EQ(replay_to_string(back), text);
  const VerifyResult v = verify_replay_text(text);
  EXPECT_TRUE(v.ok) << v.message;
  EXPECT_EQ(v.message, "ok: 400 steps");
}

TEST(Replay, VerifyFindsTamperedStep) {
  const EnvConfig c = support::config_for("cramped_room");
  auto s = seats("random", "random");
  Trajectory tr = rollout(c, s, 4);
  // first action edit at or after step 30 that changes the resulting state
  const auto states = trajectory_states(tr);
  std::size_t edited = 0;
  for (std::size_t k = 30; k < tr.size() && !edited; ++k) {
    for (Action alt : kAllActions) {
      auto actions = tr.steps[k].actions;
      actions[0] = alt;
      if (state_hash(step(c, states[k], actions).first) != tr.steps[k].state_hash) {
        tr.steps[k].actions = actions;
        edited = k;
        break;
      }
    }
  }
  ASSERT_GT(edited, 0u);
  const VerifyResult v = verify_replay_text(replay_to_string(tr));
  EXPECT_FALSE(v.ok);
  ASSERT_TRUE(v.divergent_step.has_value());
  EXPECT_EQ(*v.divergent_step, edited);
  EXPECT_TRUE(first_divergence(tr).has_value());
}

TEST(Replay, MalformedLineReportsStep) {
  const EnvConfig c = support::config_for("cramped_room");
  auto s = seats("random", "random");
  const std::string text = replay_to_string(rollout(c, s, 4));
  std::istringstream in(text);
  std::string line, out;
  for (int n = 0; std::getline(in, line); ++n) out += (n == 6 ? std::string("{not json") : line) + "\n";
  const VerifyResult v = verify_replay_text(out);
  EXPECT_FALSE(v.ok);
  ASSERT_TRUE(v.divergent_step.has_value());
  EXPECT_EQ(*v.divergent_step, 5u);
  EXPECT_FALSE(verify_replay_text(text.substr(0, text.rfind('\n', text.size() - 2) + 1)).ok);
}

TEST(Replay, FileRoundTripIsAtomic) {
  const auto dir = std::filesystem::temp_directory_path() / "ocv2_replay_test";
  std::filesystem::create_directories(dir);
  const EnvConfig c = support::config_for("cramped_room");
  auto s = seats("greedy", "greedy");
  const Trajectory tr = rollout(c, s, 1);
  const auto path = (dir / "ep.jsonl").string();
  save_replay(tr, path);
  EXPECT_EQ(slurp(path), replay_to_string(tr));
  EXPECT_TRUE(verify_replay(path).ok);
  for (const auto& e : std::filesystem::directory_iterator(dir))
    EXPECT_EQ(e.path().filename().string().find(".tmp"), std::string::npos);
  EXPECT_THROW(write_file_atomic((dir / "missing" / "x").string(), "x"), Error);
  EXPECT_THROW(load_replay((dir / "nope.jsonl").string()), Error);
  std::filesystem::remove_all(dir);
}
