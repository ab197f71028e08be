#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace ocv2 {

/// Maximum number of ingredient types a layout may use (DSL digits 0-9).
inline constexpr int kMaxIngredients = 10;

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input: bad layout text, invalid item code, bad JSON payload.
class ParseError : public Error {
 public:
  using Error::Error;
};

/// A precondition of an operation was violated by the caller.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

struct Pos {
  int x = 0;
  int y = 0;

  friend constexpr bool operator==(Pos, Pos) = default;
};

enum class Dir : std::uint8_t { Up = 0, Down = 1, Left = 2, Right = 3 };

enum class Action : std::uint8_t { Up = 0, Down = 1, Left = 2, Right = 3, Stay = 4, Interact = 5 };

inline constexpr int kNumActions = 6;
inline constexpr std::array<Action, kNumActions> kAllActions = {
    Action::Up, Action::Down, Action::Left, Action::Right, Action::Stay, Action::Interact};

constexpr Pos delta(Dir d) {
  switch (d) {
    case Dir::Up: return {0, -1};
    case Dir::Down: return {0, 1};
    case Dir::Left: return {-1, 0};
    case Dir::Right: return {1, 0};
  }
  return {0, 0};
}

constexpr Pos operator+(Pos a, Pos b) { return {a.x + b.x, a.y + b.y}; }

/// Movement actions map onto the facing direction they produce.
constexpr std::optional<Dir> move_dir(Action a) {
  switch (a) {
    case Action::Up: return Dir::Up;
    case Action::Down: return Dir::Down;
    case Action::Left: return Dir::Left;
    case Action::Right: return Dir::Right;
    default: return std::nullopt;
  }
}

std::string_view to_string(Action a);
std::string_view to_string(Dir d);
Action parse_action(std::string_view name);
Dir parse_dir(std::string_view name);

}  // namespace ocv2
