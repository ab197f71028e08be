#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ocv2/eval.hpp"

namespace ocv2 {

inline constexpr int kFrameSchemaVersion = 1;

struct FrameCell {
  char glyph = ' ';  // static layout glyph
  ItemCode item;
  std::int32_t timer = 0;
};

struct FrameAgent {
  Pos pos;
  Dir dir = Dir::Up;
  ItemCode inventory;
  bool hidden = false;  // outside the viewer's radius in a fogged frame
};

/// Everything observe() can show, in a renderer-friendly shape.
struct Frame {
  int t = 0;
  int max_steps = 0;
  int width = 0;
  int height = 0;
  int num_ingredients = 0;
  std::vector<std::string> grid;  // static glyphs with agents drawn as ^ v < >
  std::vector<FrameCell> cells;   // row-major
  std::vector<FrameAgent> agents;
  Recipe recipe;
  bool recipe_visible = false;   // some indicator shows the recipe now
  bool delivered_signal = false;
  double score = 0.0;
  std::vector<std::vector<bool>> visibility;  // [agent][cell], row-major
  int view_seat = -1;                         // set by apply_fog
};

Frame make_frame(const EnvConfig& config, const GameState& state, double score = 0.0);

/// Restricts the frame to what `seat` can see: hidden cells lose items and
/// timers, hidden agents are flagged, only the seat's mask is kept.
void apply_fog(Frame& frame, int seat);

/// Grid text plus item codes, timers and t; the string the frame hash covers.
std::string frame_canonical_text(const Frame& frame);
/// 32-bit FNV-1a of frame_canonical_text.
std::uint32_t frame_hash(const Frame& frame);
Json frame_to_json(const Frame& frame);
/// Describes the frame JSON layout for clients.
Json frame_schema();

char agent_glyph(Dir d);
std::string describe_item(ItemCode item, int num_ingredients);

/// Grid rows, then a legend with agents, items, pot and indicator timers.
std::string render_ascii(const GameState& state, const EnvConfig& config);

struct Image {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;  // palette indices, row-major
};

/// 16-entry RGB palette used by every image.
const std::vector<std::uint8_t>& palette_rgb();
Image render_image(const EnvConfig& config, const GameState& state, int tile = 16);

/// Animated GIF89a, looping, `delay_cs` hundredths of a second per frame.
std::vector<std::uint8_t> encode_gif(const std::vector<Image>& frames, int delay_cs = 10);

/// All states of a trajectory: the initial state then one per step.
std::vector<GameState> trajectory_states(const Trajectory& trajectory);

/// One frame per state, so steps + 1 frames. Throws InvalidArgument when
/// the path cannot be written.
void export_animation(const Trajectory& trajectory, const std::string& path, int tile = 16, int jobs = 1);

}  // namespace ocv2
