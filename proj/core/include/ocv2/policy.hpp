#pragma once

#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "ocv2/env.hpp"
#include "ocv2/observation.hpp"
#include "ocv2/rng.hpp"
#include "ocv2/serialize.hpp"

namespace ocv2 {

enum class PolicyKind { Random, Greedy, Tabular, External };

std::string_view to_string(PolicyKind k);

/// What a seat sees when it is asked to act. `state` is the full state; only
/// policies that declare full observability may read it.
struct PolicyInput {
  const EnvConfig& config;
  const GameState& state;
  const ObsTensor& obs;
  int agent;
};

/// A seat's controller. Instances own their memory; use one per seat.
class Policy {
 public:
  virtual ~Policy() = default;
  virtual PolicyKind kind() const = 0;
  virtual Action act(const PolicyInput& in, Rng& rng) = 0;
  /// Clears per-episode memory.
  virtual void reset() {}
  virtual std::unique_ptr<Policy> clone() const = 0;
  virtual Json to_json() const { return Json{{"kind", to_string(kind())}, {"parameters", Json::object()}}; }
};

class RandomPolicy final : public Policy {
 public:
  PolicyKind kind() const override { return PolicyKind::Random; }
  Action act(const PolicyInput& in, Rng& rng) override;
  std::unique_ptr<Policy> clone() const override { return std::make_unique<RandomPolicy>(*this); }
};

/// Scripted full-observability chef. Plans with BFS over floor cells:
/// deliver a dish, plate a cooked pot, start a full pot, bring recipe
/// ingredients to a pot. Ties break on task priority, path length, then
/// action index (Interact first, so a faced station wins). Head-on blocks
/// make the higher agent index step aside. Falls back to Stay when nothing
/// is executable.
class GreedyPolicy final : public Policy {
 public:
  PolicyKind kind() const override { return PolicyKind::Greedy; }
  Action act(const PolicyInput& in, Rng& rng) override;
  std::unique_ptr<Policy> clone() const override { return std::make_unique<GreedyPolicy>(*this); }

  /// Pure planning entry point; `act` forwards here.
  static Action plan(const EnvConfig& config, const GameState& state, int agent);
};

/// Table from state key to per-action values; greedy over the values with
/// the lowest action index winning ties. Unknown keys play Stay.
class TabularPolicy final : public Policy {
 public:
  using Table = std::map<std::string, std::array<double, kNumActions>>;

  TabularPolicy() = default;
  explicit TabularPolicy(Table table) : table_(std::move(table)) {}

  PolicyKind kind() const override { return PolicyKind::Tabular; }
  Action act(const PolicyInput& in, Rng& rng) override;
  std::unique_ptr<Policy> clone() const override { return std::make_unique<TabularPolicy>(*this); }
  Json to_json() const override;
  static TabularPolicy from_json(const Json& j);

  /// Key for an observation: hex FNV-1a of its contents.
  static std::string key(const ObsTensor& obs);

  const Table& table() const { return table_; }
  Table& table() { return table_; }

 private:
  Table table_;
};

/// Builds a policy from a name ("random", "greedy") or a JSON policy file
/// ({kind, parameters}). Throws InvalidArgument for unknown names.
std::unique_ptr<Policy> make_policy(const std::string& name_or_path);
std::unique_ptr<Policy> policy_from_json(const Json& j);

}  // namespace ocv2
