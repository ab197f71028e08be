#include "ocv2/serialize.hpp"

#include <charconv>
#include <cstdio>

namespace ocv2 {

std::string hex64(std::uint64_t v) {
  char buf[19];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::uint64_t parse_hex64(std::string_view s) {
  if (s.starts_with("0x")) s.remove_prefix(2);
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v, 16);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) {
    throw ParseError("bad hex value '" + std::string(s) + "'");
  }
  return v;
}

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

namespace {

StaticCell static_from_glyph(char c) {
  switch (c) {
    case ' ': return StaticCell::of(CellKind::Empty);
    case 'W': return StaticCell::of(CellKind::Wall);
    case 'X': return StaticCell::of(CellKind::Delivery);
    case 'P': return StaticCell::of(CellKind::Pot);
    case 'R': return StaticCell::of(CellKind::RecipeIndicator);
    case 'L': return StaticCell::of(CellKind::ButtonRecipeIndicator);
    case 'B': return StaticCell::of(CellKind::PlatePile);
    default:
      if (c >= '0' && c <= '9') return StaticCell::pile(c - '0');
      throw ParseError("state: unknown static glyph '" + std::string(1, c) + "'");
  }
}

template <typename F>
auto guarded(const char* what, F&& f) {
  try {
    return f();
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string(what) + ": " + e.what());
  }
}

}  // namespace

Json state_to_json(const GameState& s) {
  Json j;
  j["t"] = s.t;
  j["width"] = s.grid.width;
  j["height"] = s.grid.height;
  Json rows = Json::array();
  for (int y = 0; y < s.grid.height; ++y) {
    std::string row;
    for (int x = 0; x < s.grid.width; ++x) row.push_back(glyph(s.grid.statics[s.grid.index({x, y})]));
    rows.push_back(row);
  }
  j["static"] = std::move(rows);
  Json items = Json::array();
  for (ItemCode it : s.grid.items) items.push_back(it.raw);
  j["items"] = std::move(items);
  j["timers"] = s.grid.timers;
  Json agents = Json::array();
  for (const AgentState& a : s.agents) {
    agents.push_back(Json{{"pos", {a.pos.x, a.pos.y}}, {"dir", to_string(a.dir)}, {"inventory", a.inventory.raw}});
  }
  j["agents"] = std::move(agents);
  const auto ing = s.recipe.ingredients();
  j["recipe"] = {ing[0], ing[1], ing[2]};
  Json perms = Json::array();
  for (const auto& p : s.perms) perms.push_back(p.mapping());
  j["perms"] = std::move(perms);
  j["delivered_signal"] = s.delivered_signal;
  j["rng"] = Json{{"key", hex64(s.rng.key())}, {"counter", s.rng.counter()}};
  return j;
}

GameState state_from_json(const Json& j) {
  return guarded("state", [&] {
    GameState s;
    s.t = j.at("t").get<int>();
    s.grid.width = j.at("width").get<int>();
    s.grid.height = j.at("height").get<int>();
    if (s.grid.width <= 0 || s.grid.height <= 0) throw ParseError("state: non-positive grid shape");
    const auto& rows = j.at("static");
    if (!rows.is_array() || static_cast<int>(rows.size()) != s.grid.height) throw ParseError("state: static row count");
    for (const auto& row : rows) {
      const auto text = row.get<std::string>();
      if (static_cast<int>(text.size()) != s.grid.width) throw ParseError("state: static row width");
      for (char c : text) s.grid.statics.push_back(static_from_glyph(c));
    }
    const std::size_t cells = s.grid.statics.size();
    const auto& items = j.at("items");
    const auto& timers = j.at("timers");
    if (items.size() != cells || timers.size() != cells) throw ParseError("state: layer size mismatch");
    for (const auto& it : items) s.grid.items.push_back(ItemCode{it.get<std::uint32_t>()});
    for (const auto& t : timers) s.grid.timers.push_back(t.get<std::int32_t>());
    for (const auto& a : j.at("agents")) {
      AgentState ag;
      ag.pos = {a.at("pos").at(0).get<int>(), a.at("pos").at(1).get<int>()};
      ag.dir = parse_dir(a.at("dir").get<std::string>());
      ag.inventory = ItemCode{a.at("inventory").get<std::uint32_t>()};
      s.agents.push_back(ag);
    }
    const auto ing = j.at("recipe").get<std::vector<int>>();
    s.recipe = Recipe::from_ingredients(ing);
    for (const auto& p : j.at("perms")) s.perms.emplace_back(p.get<std::vector<int>>());
    s.delivered_signal = j.at("delivered_signal").get<bool>();
    const auto& rng = j.at("rng");
    s.rng = Rng(parse_hex64(rng.at("key").get<std::string>()), rng.at("counter").get<std::uint64_t>());
    return s;
  });
}

Json config_to_json(const EnvConfig& c) {
  Json j;
  j["layout"] = c.layout ? c.layout->name : "";
  j["layout_text"] = c.layout ? serialize_layout(*c.layout) : "";
  j["view_radius"] = c.view_radius ? Json(*c.view_radius) : Json(nullptr);
  j["random_agent_positions"] = c.random_agent_positions;
  j["negative_rewards"] = c.negative_rewards;
  j["sample_recipe_on_delivery"] = c.sample_recipe_on_delivery;
  j["indicate_successful_delivery"] = c.indicate_successful_delivery;
  j["auto_start_cooking"] = c.auto_start_cooking;
  j["cook_time"] = c.cook_time;
  j["button_duration"] = c.button_duration;
  j["button_cost"] = c.button_cost;
  j["max_steps"] = c.max_steps;
  j["shaped_rewards"] = Json{{"pot_placement", c.shaped_rewards.pot_placement},
                             {"plate_pickup", c.shaped_rewards.plate_pickup},
                             {"dish_pickup", c.shaped_rewards.dish_pickup}};
  Json sym = Json::array();
  for (const auto& p : c.other_play_symmetries) sym.push_back(p.mapping());
  j["other_play_symmetries"] = std::move(sym);
  return j;
}

void apply_config_overrides(EnvConfig& c, const Json& j) {
  guarded("config", [&] {
    if (!j.is_object()) throw ParseError("config: expected a JSON object");
    static const char* const kKnown[] = {"layout", "layout_text", "view_radius", "random_agent_positions",
                                         "negative_rewards", "sample_recipe_on_delivery",
                                         "indicate_successful_delivery", "auto_start_cooking", "cook_time",
                                         "button_duration", "button_cost", "max_steps", "shaped_rewards",
                                         "other_play_symmetries"};
    for (const auto& [key, _] : j.items()) {
      if (std::find(std::begin(kKnown), std::end(kKnown), key) == std::end(kKnown)) {
        throw ParseError("config: unknown key '" + key + "'");
      }
    }
    if (j.contains("layout_text")) {
      const std::string name = j.contains("layout") ? j.at("layout").get<std::string>() : std::string{};
      c.layout = std::make_shared<const Layout>(parse_layout(j.at("layout_text").get<std::string>(), name));
    } else if (j.contains("layout")) {
      c.layout = resolve_layout(j.at("layout").get<std::string>());
    }
    if (j.contains("view_radius")) {
      const auto& v = j.at("view_radius");
      c.view_radius = v.is_null() ? std::nullopt : std::optional<int>(v.get<int>());
    }
    auto flag = [&](const char* key, bool& field) {
      if (j.contains(key)) field = j.at(key).get<bool>();
    };
    flag("random_agent_positions", c.random_agent_positions);
    flag("negative_rewards", c.negative_rewards);
    flag("sample_recipe_on_delivery", c.sample_recipe_on_delivery);
    flag("indicate_successful_delivery", c.indicate_successful_delivery);
    flag("auto_start_cooking", c.auto_start_cooking);
    if (j.contains("cook_time")) c.cook_time = j.at("cook_time").get<int>();
    if (j.contains("button_duration")) c.button_duration = j.at("button_duration").get<int>();
    if (j.contains("button_cost")) c.button_cost = j.at("button_cost").get<double>();
    if (j.contains("max_steps")) c.max_steps = j.at("max_steps").get<int>();
    if (j.contains("shaped_rewards")) {
      const auto& s = j.at("shaped_rewards");
      if (s.contains("pot_placement")) c.shaped_rewards.pot_placement = s.at("pot_placement").get<double>();
      if (s.contains("plate_pickup")) c.shaped_rewards.plate_pickup = s.at("plate_pickup").get<double>();
      if (s.contains("dish_pickup")) c.shaped_rewards.dish_pickup = s.at("dish_pickup").get<double>();
    }
    if (j.contains("other_play_symmetries")) {
      c.other_play_symmetries.clear();
      for (const auto& p : j.at("other_play_symmetries")) c.other_play_symmetries.emplace_back(p.get<std::vector<int>>());
    }
    return 0;
  });
}

EnvConfig config_from_json(const Json& j) {
  EnvConfig c;
  apply_config_overrides(c, j);
  c.check();
  return c;
}

std::string config_digest(const EnvConfig& c) { return hex64(fnv1a64(config_to_json(c).dump())); }

Json event_to_json(const Event& e) {
  return std::visit(
      [](const auto& ev) -> Json {
        using T = std::decay_t<decltype(ev)>;
        if constexpr (std::is_same_v<T, event::Delivered>) {
          const auto ing = ev.recipe.ingredients();
          return Json{{"type", "delivered"}, {"agent", ev.agent}, {"correct", ev.correct},
                      {"recipe", {ing[0], ing[1], ing[2]}}, {"dish", ev.dish.raw}};
        } else if constexpr (std::is_same_v<T, event::CookingStarted>) {
          return Json{{"type", "cooking_started"}, {"pos", {ev.pos.x, ev.pos.y}}};
        } else if constexpr (std::is_same_v<T, event::ButtonPressed>) {
          return Json{{"type", "button_pressed"}, {"agent", ev.agent}, {"pos", {ev.pos.x, ev.pos.y}}};
        } else if constexpr (std::is_same_v<T, event::Placed>) {
          return Json{{"type", "placed"}, {"agent", ev.agent}, {"pos", {ev.pos.x, ev.pos.y}}, {"item", ev.item.raw}};
        } else {
          return Json{{"type", "picked_up"}, {"agent", ev.agent}, {"pos", {ev.pos.x, ev.pos.y}}, {"item", ev.item.raw}};
        }
      },
      e);
}

Event event_from_json(const Json& j) {
  try {
    const std::string type = j.at("type").get<std::string>();
    auto pos = [&] { return Pos{j.at("pos").at(0).get<int>(), j.at("pos").at(1).get<int>()}; };
    if (type == "delivered") {
      const std::vector<int> ing = j.at("recipe").get<std::vector<int>>();
      return event::Delivered{j.at("agent").get<int>(), j.at("correct").get<bool>(), Recipe::from_ingredients(ing),
                              ItemCode{j.at("dish").get<std::uint32_t>()}};
    }
    if (type == "cooking_started") return event::CookingStarted{pos()};
    if (type == "button_pressed") return event::ButtonPressed{j.at("agent").get<int>(), pos()};
    if (type == "placed") return event::Placed{j.at("agent").get<int>(), pos(), ItemCode{j.at("item").get<std::uint32_t>()}};
    if (type == "picked_up") {
      return event::PickedUp{j.at("agent").get<int>(), pos(), ItemCode{j.at("item").get<std::uint32_t>()}};
    }
    throw ParseError("unknown event type '" + type + "'");
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("bad event: ") + e.what());
  }
}

}  // namespace ocv2
