#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include "ocv2/layout.hpp"
#include "ocv2/rng.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace ocv2;

#ifndef OCV2_FIXTURES
#define OCV2_FIXTURES "tests/fixtures"
#endif

namespace {

std::string read(const std::string& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST(Layout, DemoStringStructure) {
  const Layout& l = support::demo_layout();
  EXPECT_EQ(l.width, 5);
  EXPECT_EQ(l.height, 4);
  EXPECT_EQ(l.num_agents(), 2);
  EXPECT_EQ(l.num_ingredients, 2);
  ASSERT_EQ(l.possible_recipes.size(), 2u);
  EXPECT_EQ(l.possible_recipes[0].to_string(), "0,0,1");
  EXPECT_EQ(l.possible_recipes[1].to_string(), "0,1,1");
  EXPECT_EQ(l.spawns, (std::vector<Pos>{{1, 1}, {3, 1}}));
  EXPECT_EQ(l.at({2, 0}).kind(), CellKind::Pot);
  EXPECT_EQ(l.at({0, 1}).ingredient(), 0);
  EXPECT_EQ(l.at({4, 1}).ingredient(), 1);
  EXPECT_EQ(l.at({0, 2}).kind(), CellKind::ButtonRecipeIndicator);
  EXPECT_EQ(l.at({4, 2}).kind(), CellKind::RecipeIndicator);
  EXPECT_EQ(l.at({1, 3}).kind(), CellKind::PlatePile);
  EXPECT_EQ(l.at({3, 3}).kind(), CellKind::Delivery);
  EXPECT_EQ(l.at({1, 1}).kind(), CellKind::Empty);  // spawn cells are floor
}

TEST(Layout, GoldenFixture) {
  const Layout l = load_layout_file(std::string(OCV2_FIXTURES) + "/demo.layout");
  EXPECT_EQ(l.name, "demo");
  EXPECT_EQ(serialize_layout(l), read(std::string(OCV2_FIXTURES) + "/demo.expected"));
  EXPECT_EQ(l, support::demo_layout());
}

TEST(Layout, DefaultRecipesAreAllTriplesOverPresentPiles) {
  const Layout l = parse_layout("WW0WW\nX A 2\nWPWBW\n");
  EXPECT_EQ(l.num_ingredients, 3);
  ASSERT_EQ(l.possible_recipes.size(), 4u);
  EXPECT_EQ(l.possible_recipes.front().to_string(), "0,0,0");
  EXPECT_EQ(l.possible_recipes.back().to_string(), "2,2,2");
}

TEST(Layout, RaggedRowsArePadded) {
  // short rows gain spaces on the right, which puts floor on the border
  try {
    parse_layout("WWPWWW\nW0 A X\nWBW\n");
    FAIL() << "padded border accepted";
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("row 3, column 4"), std::string::npos) << e.what();
  }
}

TEST(Layout, ParseErrors) {
  EXPECT_THROW(parse_layout(""), ParseError);
  EXPECT_THROW(parse_layout("WWPWW\n0 AQX\nWBWWW\n"), ParseError);         // unknown char
  EXPECT_THROW(parse_layout("WWPWW\n0 A X\nWBW W\n"), ParseError);         // floor on border
  EXPECT_THROW(parse_layout("WWPWW\n0   X\nWBWWW\n"), ParseError);         // no agent
  EXPECT_THROW(parse_layout("WWWWW\n0 A X\nWBWWW\n"), ParseError);         // no pot
  EXPECT_THROW(parse_layout("WWPWW\n0 A X\nWBWWW\n\nrecipes=0,0,1\n"), ParseError);  // no pile 1
  EXPECT_THROW(parse_layout("WWPWW\n0 A X\nWBWWW\n\nrecipes=0,0\n"), ParseError);
  EXPECT_THROW(parse_layout("WWPWW\n0 A X\nWBWWW\n\ncolour=blue\n"), ParseError);
}

TEST(Layout, SerializeParseFixpointOnBuiltins) {
  for (const auto& name : builtin_names()) {
    const Layout& l = builtin(name);
    const std::string text = serialize_layout(l);
    const Layout again = parse_layout(text);
    EXPECT_EQ(again, l) << name;
    EXPECT_EQ(serialize_layout(again), text) << name;
  }
}

TEST(Layout, SerializeParseFixpointOnGeneratedLayouts) {
  Rng rng(2024);
  int parsed = 0;
  for (int k = 0; k < 1000; ++k) {
    const std::string text = oracle::random_layout(rng);
    const Layout l = parse_layout(text);
    const std::string canon = serialize_layout(l);
    const Layout again = parse_layout(canon);
    ASSERT_EQ(again, l) << text;
    ASSERT_EQ(serialize_layout(again), canon) << text;
    ++parsed;
  }
  EXPECT_EQ(parsed, 1000);
}

TEST(Layout, RegistryHasAllBuiltinsInOrder) {
  const std::vector<std::string> expected = {
      "cramped_room", "asymm_advantages", "coord_ring", "forced_coord", "counter_circuit", "cramped_room_v2",
      "asymm_advantages_recipes_left", "asymm_advantages_recipes_center", "asymm_advantages_recipes_right",
      "two_rooms", "grounded_coord_simple", "grounded_coord_ring", "test_time_simple", "test_time_wide",
      "demo_cook_simple", "demo_cook_wide"};
  EXPECT_EQ(builtin_names(), expected);
  for (const auto& name : expected) {
    EXPECT_EQ(builtin(name).name, name);
    EXPECT_TRUE(validate(builtin(name)).empty()) << name;
  }
  try {
    builtin("kitchen");
    FAIL();
  } catch (const InvalidArgument& e) {
    EXPECT_NE(std::string(e.what()).find("cramped_room"), std::string::npos);
  }
}

TEST(Layout, CrampedRoomGeometry) {
  const Layout& l = builtin("cramped_room");
  EXPECT_EQ(serialize_layout(l), "WWPWW\n0  A0\nWA  W\nWBWXW\n\nname=cramped_room\n");
  EXPECT_EQ(l.num_ingredients, 1);
  EXPECT_EQ(l.possible_recipes.size(), 1u);
}

TEST(Layout, ValidateReportsUnreachableStations) {
  // pot sealed off behind counters
  const Layout l = parse_layout("WWWWW\nW A X\nWWWWW\nWPW0W\nWWWBW\n");
  const auto issues = validate(l);
  auto has = [&](const std::string& s) {
    return std::any_of(issues.begin(), issues.end(), [&](const std::string& i) { return i.find(s) != std::string::npos; });
  };
  EXPECT_TRUE(has("pot unreachable"));
  EXPECT_TRUE(has("plate pile unreachable"));
  EXPECT_TRUE(has("ingredient 0 pile unreachable"));
}

TEST(Layout, ReachableFloorBfs) {
  const Layout& l = builtin("cramped_room");
  EXPECT_EQ(reachable_floor(l, l.spawns[0]).size(), 6u);
}
