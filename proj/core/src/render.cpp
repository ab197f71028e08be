#include "ocv2/render.hpp"

#include <cstdio>
#include <sstream>

#include "ocv2/observation.hpp"

namespace ocv2 {

char agent_glyph(Dir d) {
  switch (d) {
    case Dir::Up: return '^';
    case Dir::Down: return 'v';
    case Dir::Left: return '<';
    case Dir::Right: return '>';
  }
  return '?';
}

std::string describe_item(ItemCode item, int n) {
  if (item.empty()) return "nothing";
  if (item.is_bare_plate()) return "plate";
  std::string contents = "[";
  for (int i = 0; i < n; ++i) {
    for (int k = 0; k < item.count(i); ++k) {
      if (contents.size() > 1) contents += ',';
      contents += std::to_string(i);
    }
  }
  contents += ']';
  if (item.plated() && item.cooked()) return "dish " + contents;
  if (item.cooked()) return "cooked " + contents;
  if (item.plated()) return "plated " + contents;
  if (item.total() == 1) return "ingredient " + contents.substr(1, contents.size() - 2);
  return "raw " + contents;
}

Frame make_frame(const EnvConfig& config, const GameState& s, double score) {
  Frame f;
  f.t = s.t;
  f.max_steps = config.max_steps;
  f.width = s.grid.width;
  f.height = s.grid.height;
  f.num_ingredients = config.num_ingredients();
  f.recipe = s.recipe;
  f.delivered_signal = s.delivered_signal && config.indicate_successful_delivery;
  f.score = score;
  f.cells.reserve(s.grid.statics.size());
  for (std::size_t i = 0; i < s.grid.statics.size(); ++i) {
    const StaticCell cell = s.grid.statics[i];
    f.cells.push_back({glyph(cell), s.grid.items[i], s.grid.timers[i]});
    if (cell.kind() == CellKind::RecipeIndicator ||
        (cell.kind() == CellKind::ButtonRecipeIndicator && s.grid.timers[i] > 0)) {
      f.recipe_visible = true;
    }
  }
  for (int y = 0; y < f.height; ++y) {
    std::string row;
    for (int x = 0; x < f.width; ++x) row += f.cells[static_cast<std::size_t>(y * f.width + x)].glyph;
    f.grid.push_back(std::move(row));
  }
  for (int a = 0; a < static_cast<int>(s.agents.size()); ++a) {
    const AgentState& ag = s.agents[static_cast<std::size_t>(a)];
    f.agents.push_back({ag.pos, ag.dir, ag.inventory});
    f.grid[static_cast<std::size_t>(ag.pos.y)][static_cast<std::size_t>(ag.pos.x)] = agent_glyph(ag.dir);
    std::vector<bool> mask;
    mask.reserve(f.cells.size());
    for (int y = 0; y < f.height; ++y) {
      for (int x = 0; x < f.width; ++x) mask.push_back(visible(config, s, a, {x, y}));
    }
    f.visibility.push_back(std::move(mask));
  }
  return f;
}

void apply_fog(Frame& f, int seat) {
  if (seat < 0 || seat >= static_cast<int>(f.visibility.size())) throw InvalidArgument("apply_fog: bad seat");
  const std::vector<bool> mask = f.visibility[static_cast<std::size_t>(seat)];
  f.recipe_visible = false;
  for (std::size_t i = 0; i < f.cells.size(); ++i) {
    FrameCell& c = f.cells[i];
    const int x = static_cast<int>(i) % f.width, y = static_cast<int>(i) / f.width;
    if (!mask[i]) {
      c.item = kEmptyItem;
      c.timer = 0;
      f.grid[static_cast<std::size_t>(y)][static_cast<std::size_t>(x)] = c.glyph;
    } else if (c.glyph == 'R' || (c.glyph == 'L' && c.timer > 0)) {
      f.recipe_visible = true;
    }
  }
  for (auto& a : f.agents) {
    if (mask[static_cast<std::size_t>(a.pos.y * f.width + a.pos.x)]) continue;
    a.hidden = true;
    a.inventory = kEmptyItem;
  }
  f.visibility = {mask};
  f.view_seat = seat;
}

std::string frame_canonical_text(const Frame& f) {
  std::string out;
  for (const auto& row : f.grid) {
    out += row;
    out += '\n';
  }
  for (std::size_t i = 0; i < f.cells.size(); ++i) {
    if (i) out += ',';
    out += std::to_string(f.cells[i].item.raw) + ':' + std::to_string(f.cells[i].timer);
  }
  out += '\n';
  for (const auto& a : f.agents) out += std::to_string(a.inventory.raw) + ';';
  out += '\n' + std::to_string(f.t);
  return out;
}

std::uint32_t frame_hash(const Frame& f) {
  std::uint32_t h = 2166136261u;
  for (unsigned char c : frame_canonical_text(f)) {
    h ^= c;
    h *= 16777619u;
  }
  return h;
}

Json frame_to_json(const Frame& f) {
  Json cells = Json::array();
  for (const auto& c : f.cells) {
    cells.push_back(Json{{"glyph", std::string(1, c.glyph)},
                         {"item", c.item.raw},
                         {"item_desc", describe_item(c.item, f.num_ingredients)},
                         {"timer", c.timer}});
  }
  Json agents = Json::array();
  for (std::size_t a = 0; a < f.agents.size(); ++a) {
    const auto& ag = f.agents[a];
    if (ag.hidden) {
      agents.push_back(Json{{"id", a}, {"hidden", true}});
      continue;
    }
    agents.push_back(Json{{"id", a},
                          {"hidden", false},
                          {"pos", {ag.pos.x, ag.pos.y}},
                          {"dir", std::string(to_string(ag.dir))},
                          {"inventory", ag.inventory.raw},
                          {"inventory_desc", describe_item(ag.inventory, f.num_ingredients)}});
  }
  Json vis = Json::array();
  for (const auto& mask : f.visibility) {
    Json rows = Json::array();
    for (int y = 0; y < f.height; ++y) {
      std::string row;
      for (int x = 0; x < f.width; ++x) row += mask[static_cast<std::size_t>(y * f.width + x)] ? '1' : '0';
      rows.push_back(std::move(row));
    }
    vis.push_back(std::move(rows));
  }
  const auto ing = f.recipe.ingredients();
  char hash[9];
  std::snprintf(hash, sizeof hash, "%08x", frame_hash(f));
  return Json{{"schema", "ocv2.frame"},
              {"version", kFrameSchemaVersion},
              {"t", f.t},
              {"max_steps", f.max_steps},
              {"width", f.width},
              {"height", f.height},
              {"num_ingredients", f.num_ingredients},
              {"grid", f.grid},
              {"cells", std::move(cells)},
              {"agents", std::move(agents)},
              {"recipe", f.view_seat >= 0 && !f.recipe_visible ? Json(nullptr) : Json{ing[0], ing[1], ing[2]}},
              {"view_seat", f.view_seat >= 0 ? Json(f.view_seat) : Json(nullptr)},
              {"recipe_visible", f.recipe_visible},
              {"delivered_signal", f.delivered_signal},
              {"score", f.score},
              {"visibility", std::move(vis)},
              {"hash", hash}};
}

Json frame_schema() {
  return Json{
      {"schema", "ocv2.frame"},
      {"version", kFrameSchemaVersion},
      {"glyphs",
       {{" ", "floor"}, {"W", "counter"}, {"X", "delivery"}, {"P", "pot"}, {"R", "recipe indicator"},
        {"L", "button recipe indicator"}, {"B", "plate pile"}, {"0-9", "ingredient pile"},
        {"^v<>", "agent facing up/down/left/right"}}},
      {"item_bits", "bit0 plated, bit1 cooked, bits 2+2i..3+2i count of ingredient i"},
      {"hash", "FNV-1a 32 over grid rows each followed by \\n, then item:timer per cell joined by ',', "
               "\\n, inventory followed by ';' per agent, \\n, t; lowercase hex"},
      {"visibility", "per agent, rows of '1' (visible) / '0'; only the viewer's mask when view_seat is set"},
      {"fog", "with view_seat set, hidden cells carry item 0 and timer 0, hidden agents only {id, hidden}, "
              "and recipe is null unless an indicator is in view"}};
}

std::string render_ascii(const GameState& s, const EnvConfig& config) {
  const Frame f = make_frame(config, s);
  const int n = f.num_ingredients;
  std::ostringstream os;
  for (const auto& row : f.grid) os << row << '\n';
  os << "t " << f.t << '/' << f.max_steps << "  recipe " << f.recipe.to_string() << '\n';
  for (std::size_t a = 0; a < f.agents.size(); ++a) {
    const auto& ag = f.agents[a];
    os << "agent " << a << " (" << ag.pos.x << ',' << ag.pos.y << ") " << agent_glyph(ag.dir) << " holding "
       << describe_item(ag.inventory, n) << '\n';
  }
  for (int y = 0; y < f.height; ++y) {
    for (int x = 0; x < f.width; ++x) {
      const FrameCell& c = f.cells[static_cast<std::size_t>(y * f.width + x)];
      const CellKind kind = s.grid.statics[static_cast<std::size_t>(y * f.width + x)].kind();
      const std::string where = "(" + std::to_string(x) + "," + std::to_string(y) + ")";
      if (kind == CellKind::Pot) {
        if (c.item.empty() && c.timer == 0) continue;
        std::string what = describe_item(c.item, n);
        if (c.timer > 0 && what.rfind("raw ", 0) == 0) what = "cooking " + what.substr(4);
        if (c.timer > 0 && what.rfind("ingredient ", 0) == 0) what = "cooking [" + what.substr(11) + "]";
        os << "pot " << where << ' ' << what;
        if (c.timer > 0) os << ", " << c.timer << " ticks left";
        os << '\n';
      } else if (kind == CellKind::ButtonRecipeIndicator) {
        if (c.timer > 0) os << "indicator " << where << " showing, " << c.timer << " ticks left\n";
      } else if (!c.item.empty()) {
        os << "item " << where << ' ' << describe_item(c.item, n) << '\n';
      }
    }
  }
  if (f.delivered_signal) os << "delivered signal on\n";
  return os.str();
}

std::vector<GameState> trajectory_states(const Trajectory& tr) {
  std::vector<GameState> states;
  states.reserve(tr.steps.size() + 1);
  states.push_back(tr.initial);
  GameState s = tr.initial;
  for (const auto& step : tr.steps) {
    step_inplace(tr.config, s, step.actions);
    states.push_back(s);
  }
  return states;
}

void export_animation(const Trajectory& tr, const std::string& path, int tile, int jobs) {
  const auto states = trajectory_states(tr);
  std::vector<Image> images(states.size());
  parallel_for(states.size(), jobs, [&](std::size_t k) { images[k] = render_image(tr.config, states[k], tile); });
  const auto bytes = encode_gif(images);
  write_file_atomic(path, std::string(bytes.begin(), bytes.end()));
}

}  // namespace ocv2
