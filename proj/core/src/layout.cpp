#include "ocv2/layout.hpp"

#include <algorithm>
#include <charconv>
#include <deque>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

namespace ocv2 {

namespace {

bool is_blank(std::string_view line) {
  return std::all_of(line.begin(), line.end(), [](char c) { return c == ' ' || c == '\t' || c == '\r'; });
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t end = text.find('\n', start);
    std::string_view line = text.substr(start, end == std::string_view::npos ? std::string_view::npos : end - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.push_back(line);
    if (end == std::string_view::npos) break;
    start = end + 1;
  }
  return lines;
}

std::vector<Recipe> parse_recipes(std::string_view value, int line_no) {
  std::vector<Recipe> out;
  std::size_t start = 0;
  while (start <= value.size()) {
    const std::size_t end = value.find(';', start);
    const std::string_view item = trim(value.substr(start, end == std::string_view::npos ? std::string_view::npos : end - start));
    if (!item.empty()) {
      std::vector<int> ing;
      std::size_t p = 0;
      while (p <= item.size()) {
        const std::size_t comma = item.find(',', p);
        const std::string_view tok = trim(item.substr(p, comma == std::string_view::npos ? std::string_view::npos : comma - p));
        int v = -1;
        const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
        if (ec != std::errc() || ptr != tok.data() + tok.size() || v < 0 || v >= kMaxIngredients) {
          throw ParseError("line " + std::to_string(line_no) + ": bad ingredient '" + std::string(tok) +
                           "' in recipes directive");
        }
        ing.push_back(v);
        if (comma == std::string_view::npos) break;
        p = comma + 1;
      }
      if (ing.size() != 3) {
        throw ParseError("line " + std::to_string(line_no) + ": recipe '" + std::string(item) +
                         "' must list exactly three ingredients");
      }
      out.push_back(Recipe::from_ingredients(ing));
    }
    if (end == std::string_view::npos) break;
    start = end + 1;
  }
  if (out.empty()) throw ParseError("line " + std::to_string(line_no) + ": empty recipes directive");
  return out;
}

void canonicalize(std::vector<Recipe>& recipes) {
  std::sort(recipes.begin(), recipes.end());
  recipes.erase(std::unique(recipes.begin(), recipes.end()), recipes.end());
}

}  // namespace

char glyph(StaticCell cell) {
  switch (cell.kind()) {
    case CellKind::Empty: return ' ';
    case CellKind::Wall: return 'W';
    case CellKind::Delivery: return 'X';
    case CellKind::Pot: return 'P';
    case CellKind::RecipeIndicator: return 'R';
    case CellKind::ButtonRecipeIndicator: return 'L';
    case CellKind::PlatePile: return 'B';
    case CellKind::IngredientPile: return static_cast<char>('0' + cell.ingredient());
  }
  return '?';
}

std::vector<int> Layout::present_ingredients() const {
  std::vector<bool> present(static_cast<std::size_t>(kMaxIngredients), false);
  for (StaticCell c : cells) {
    if (c.kind() == CellKind::IngredientPile) present[static_cast<std::size_t>(c.ingredient())] = true;
  }
  std::vector<int> out;
  for (int i = 0; i < kMaxIngredients; ++i) {
    if (present[static_cast<std::size_t>(i)]) out.push_back(i);
  }
  return out;
}

Layout parse_layout(std::string_view text, std::string name) {
  const auto lines = split_lines(text);
  std::size_t i = 0;
  while (i < lines.size() && is_blank(lines[i])) ++i;
  const std::size_t grid_begin = i;
  while (i < lines.size() && !is_blank(lines[i])) ++i;
  const std::size_t grid_end = i;
  if (grid_begin == grid_end) throw ParseError("layout: empty grid");

  Layout layout;
  layout.name = std::move(name);
  layout.height = static_cast<int>(grid_end - grid_begin);
  for (std::size_t r = grid_begin; r < grid_end; ++r) {
    layout.width = std::max(layout.width, static_cast<int>(lines[r].size()));
  }
  layout.cells.assign(static_cast<std::size_t>(layout.width * layout.height), StaticCell::of(CellKind::Empty));

  for (int y = 0; y < layout.height; ++y) {
    const std::string_view row = lines[grid_begin + static_cast<std::size_t>(y)];
    for (int x = 0; x < static_cast<int>(row.size()); ++x) {
      const char ch = row[static_cast<std::size_t>(x)];
      StaticCell cell;
      switch (ch) {
        case ' ': cell = StaticCell::of(CellKind::Empty); break;
        case 'A':
          cell = StaticCell::of(CellKind::Empty);
          layout.spawns.push_back({x, y});
          break;
        case 'W': cell = StaticCell::of(CellKind::Wall); break;
        case 'X': cell = StaticCell::of(CellKind::Delivery); break;
        case 'B': cell = StaticCell::of(CellKind::PlatePile); break;
        case 'P': cell = StaticCell::of(CellKind::Pot); break;
        case 'R': cell = StaticCell::of(CellKind::RecipeIndicator); break;
        case 'L': cell = StaticCell::of(CellKind::ButtonRecipeIndicator); break;
        default:
          if (ch >= '0' && ch <= '9') {
            cell = StaticCell::pile(ch - '0');
            layout.num_ingredients = std::max(layout.num_ingredients, ch - '0' + 1);
          } else {
            throw ParseError("layout: unknown character '" + std::string(1, ch) + "' at row " +
                             std::to_string(y + 1) + ", column " + std::to_string(x + 1));
          }
      }
      layout.cells[static_cast<std::size_t>(layout.index({x, y}))] = cell;
    }
  }

  std::optional<std::vector<Recipe>> recipes;
  for (std::size_t r = grid_end; r < lines.size(); ++r) {
    const std::string_view line = trim(lines[r]);
    if (line.empty() || line.front() == '#') continue;
    const std::size_t eq = line.find('=');
    const int line_no = static_cast<int>(r + 1);
    if (eq == std::string_view::npos) {
      throw ParseError("line " + std::to_string(line_no) + ": expected key=value directive, got '" +
                       std::string(line) + "'");
    }
    const std::string_view key = trim(line.substr(0, eq));
    const std::string_view value = trim(line.substr(eq + 1));
    if (key == "recipes") {
      recipes = parse_recipes(value, line_no);
    } else if (key == "name") {
      layout.name = std::string(value);
    } else {
      throw ParseError("line " + std::to_string(line_no) + ": unknown directive '" + std::string(key) + "'");
    }
  }

  if (layout.spawns.empty()) throw ParseError("layout: no agents ('A')");
  for (int y = 0; y < layout.height; ++y) {
    for (int x = 0; x < layout.width; ++x) {
      const bool border = x == 0 || y == 0 || x == layout.width - 1 || y == layout.height - 1;
      if (border && layout.at({x, y}).walkable()) {
        throw ParseError("layout: walkable cell on the border at row " + std::to_string(y + 1) + ", column " +
                         std::to_string(x + 1));
      }
    }
  }
  auto has_kind = [&](CellKind k) {
    return std::any_of(layout.cells.begin(), layout.cells.end(), [k](StaticCell c) { return c.kind() == k; });
  };
  const std::pair<CellKind, const char*> required[] = {{CellKind::Delivery, "delivery station ('X')"},
                                                       {CellKind::Pot, "pot ('P')"},
                                                       {CellKind::PlatePile, "plate pile ('B')"},
                                                       {CellKind::IngredientPile, "ingredient pile ('0'-'9')"}};
  for (const auto& [kind, label] : required) {
    if (!has_kind(kind)) throw ParseError(std::string("layout: missing ") + label);
  }

  const std::vector<int> present = layout.present_ingredients();
  if (recipes) {
    for (const Recipe& rec : *recipes) {
      for (int ing : rec.ingredients()) {
        if (!std::binary_search(present.begin(), present.end(), ing)) {
          throw ParseError("layout: recipe " + rec.to_string() + " uses ingredient " + std::to_string(ing) +
                           " which has no pile");
        }
      }
    }
    layout.possible_recipes = std::move(*recipes);
  } else {
    layout.possible_recipes = enumerate_recipes(present);
  }
  canonicalize(layout.possible_recipes);
  return layout;
}

std::string serialize_layout(const Layout& layout) {
  std::string out;
  out.reserve(static_cast<std::size_t>((layout.width + 1) * layout.height + 64));
  for (int y = 0; y < layout.height; ++y) {
    std::string row;
    for (int x = 0; x < layout.width; ++x) row.push_back(glyph(layout.at({x, y})));
    for (Pos s : layout.spawns) {
      if (s.y == y) row[static_cast<std::size_t>(s.x)] = 'A';
    }
    out += row;
    out.push_back('\n');
  }
  auto defaults = enumerate_recipes(layout.present_ingredients());
  canonicalize(defaults);
  auto recipes = layout.possible_recipes;
  canonicalize(recipes);
  const bool emit_recipes = recipes != defaults;
  if (!layout.name.empty() || emit_recipes) out.push_back('\n');
  if (!layout.name.empty()) out += "name=" + layout.name + "\n";
  if (emit_recipes) {
    out += "recipes=";
    for (std::size_t i = 0; i < recipes.size(); ++i) {
      if (i != 0) out.push_back(';');
      out += recipes[i].to_string();
    }
    out.push_back('\n');
  }
  return out;
}

Layout load_layout_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidArgument("cannot open layout file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_layout(ss.str(), std::filesystem::path(path).stem().string());
}

std::vector<Pos> reachable_floor(const Layout& layout, Pos start) {
  std::vector<Pos> out;
  if (!layout.in_bounds(start) || !layout.at(start).walkable()) return out;
  std::vector<bool> seen(layout.cells.size(), false);
  std::deque<Pos> frontier{start};
  seen[static_cast<std::size_t>(layout.index(start))] = true;
  while (!frontier.empty()) {
    const Pos p = frontier.front();
    frontier.pop_front();
    out.push_back(p);
    for (Dir d : {Dir::Up, Dir::Down, Dir::Left, Dir::Right}) {
      const Pos q = p + delta(d);
      if (!layout.in_bounds(q) || !layout.at(q).walkable()) continue;
      const auto qi = static_cast<std::size_t>(layout.index(q));
      if (seen[qi]) continue;
      seen[qi] = true;
      frontier.push_back(q);
    }
  }
  std::sort(out.begin(), out.end(), [&](Pos a, Pos b) { return layout.index(a) < layout.index(b); });
  return out;
}

std::vector<std::string> validate(const Layout& layout) {
  std::vector<std::string> issues;
  const std::size_t n = layout.cells.size();
  std::vector<bool> reached(n, false);
  // Station cells adjacent to each agent's region.
  std::vector<std::vector<bool>> touched(layout.spawns.size(), std::vector<bool>(n, false));

  for (std::size_t a = 0; a < layout.spawns.size(); ++a) {
    for (Pos p : reachable_floor(layout, layout.spawns[a])) {
      reached[static_cast<std::size_t>(layout.index(p))] = true;
      for (Dir d : {Dir::Up, Dir::Down, Dir::Left, Dir::Right}) {
        const Pos q = p + delta(d);
        if (layout.in_bounds(q) && !layout.at(q).walkable()) touched[a][static_cast<std::size_t>(layout.index(q))] = true;
      }
    }
  }

  auto kind_reachable = [&](auto pred) {
    for (const auto& region : touched) {
      for (std::size_t i = 0; i < n; ++i) {
        if (region[i] && pred(layout.cells[i])) return true;
      }
    }
    return false;
  };
  auto kind_present = [&](auto pred) { return std::any_of(layout.cells.begin(), layout.cells.end(), pred); };

  const std::pair<CellKind, const char*> stations[] = {{CellKind::Pot, "pot"},
                                                       {CellKind::Delivery, "delivery"},
                                                       {CellKind::PlatePile, "plate pile"},
                                                       {CellKind::ButtonRecipeIndicator, "button recipe indicator"}};
  for (const auto& [kind, label] : stations) {
    auto is_kind = [k = kind](StaticCell c) { return c.kind() == k; };
    const bool optional = kind == CellKind::ButtonRecipeIndicator;
    if (optional && !kind_present(is_kind)) continue;
    if (!kind_reachable(is_kind)) issues.push_back(std::string(label) + " unreachable");
  }

  std::vector<bool> needed(static_cast<std::size_t>(kMaxIngredients), false);
  const std::vector<int> present = layout.present_ingredients();
  for (const Recipe& r : layout.possible_recipes) {
    for (int ing : r.ingredients()) {
      needed[static_cast<std::size_t>(ing)] = true;
      if (!std::binary_search(present.begin(), present.end(), ing)) {
        issues.push_back("recipe " + r.to_string() + " uses ingredient " + std::to_string(ing) + " with no pile");
      }
    }
  }
  for (int ing : present) {
    if (!needed[static_cast<std::size_t>(ing)]) continue;
    if (!kind_reachable([ing](StaticCell c) { return c.ingredient() == ing; })) {
      issues.push_back("ingredient " + std::to_string(ing) + " pile unreachable");
    }
  }

  for (std::size_t a = 0; a < touched.size(); ++a) {
    bool any = false;
    for (std::size_t i = 0; i < n && !any; ++i) {
      const CellKind k = layout.cells[i].kind();
      any = touched[a][i] && k != CellKind::Wall && k != CellKind::RecipeIndicator;
    }
    if (!any) issues.push_back("agent " + std::to_string(a) + " cannot reach any station");
  }

  for (std::size_t i = 0; i < n; ++i) {
    if (layout.cells[i].walkable() && !reached[i]) {
      const Pos p = layout.pos_of(static_cast<int>(i));
      issues.push_back("floor cell (" + std::to_string(p.x) + "," + std::to_string(p.y) +
                       ") unreachable from every agent");
    }
  }
  return issues;
}

}  // namespace ocv2
