#include "ocv2/types.hpp"

#include <string>

namespace ocv2 {

namespace {
constexpr std::array<std::string_view, kNumActions> kActionNames = {"up", "down", "left", "right", "stay",
                                                                    "interact"};
constexpr std::array<std::string_view, 4> kDirNames = {"up", "down", "left", "right"};
}  // namespace

std::string_view to_string(Action a) { return kActionNames[static_cast<std::size_t>(a)]; }

std::string_view to_string(Dir d) { return kDirNames[static_cast<std::size_t>(d)]; }

Action parse_action(std::string_view name) {
  for (std::size_t i = 0; i < kActionNames.size(); ++i) {
    if (kActionNames[i] == name) return static_cast<Action>(i);
  }
  throw ParseError("unknown action '" + std::string(name) + "'");
}

Dir parse_dir(std::string_view name) {
  for (std::size_t i = 0; i < kDirNames.size(); ++i) {
    if (kDirNames[i] == name) return static_cast<Dir>(i);
  }
  throw ParseError("unknown direction '" + std::string(name) + "'");
}

}  // namespace ocv2
