#include <algorithm>
#include <array>

#include "ocv2/render.hpp"

namespace ocv2 {

namespace {

enum Color : std::uint8_t {
  kFloor, kCounter, kDelivery, kPot, kIndicator, kButton, kPlateColor, kIng0,
  kIng1, kIng2, kIng3, kAgent0, kAgent1, kBlack, kTimer, kAgentOther,
};

Color ingredient_color(int i) {
  switch (i) {
    case 0: return kIng0;
    case 1: return kIng1;
    case 2: return kIng2;
    default: return kIng3;
  }
}

struct Canvas {
  Image img;
  int tile;

  void fill(int x0, int y0, int w, int h, Color c) {
    for (int y = std::max(y0, 0); y < std::min(y0 + h, img.height); ++y) {
      for (int x = std::max(x0, 0); x < std::min(x0 + w, img.width); ++x) {
        img.pixels[static_cast<std::size_t>(y * img.width + x)] = c;
      }
    }
  }

  // units of the item as small squares, plate underneath
  void item(int px, int py, int size, ItemCode item, int n) {
    if (item.empty()) return;
    if (item.plated()) fill(px, py, size, size, kPlateColor);
    const int unit = std::max(size / 4, 1);
    int k = 0;
    for (int i = 0; i < n; ++i) {
      for (int c = 0; c < item.count(i); ++c, ++k) {
        fill(px + unit / 2 + k * (unit + unit / 3), py + size / 2 - unit / 2, unit, unit, ingredient_color(i));
      }
    }
    if (item.cooked()) fill(px, py + size - 1, size, 1, kTimer);
  }

  void recipe(int px, int py, const Recipe& r) {
    const auto ing = r.ingredients();
    const int unit = std::max(tile / 5, 1);
    for (int k = 0; k < 3; ++k) fill(px + unit / 2 + k * (unit + 1), py + tile / 2 - unit / 2, unit, unit, ingredient_color(ing[k]));
  }
};

}  // namespace

const std::vector<std::uint8_t>& palette_rgb() {
  static const std::vector<std::uint8_t> p = {
      210, 205, 190,  // floor
      130, 95,  60,   // counter
      70,  160, 70,   // delivery
      45,  45,  45,   // pot
      200, 170, 220,  // recipe indicator
      150, 80,  190,  // button indicator
      245, 245, 245,  // plate
      235, 200, 40,   // ingredient 0
      215, 60,  45,   // ingredient 1
      60,  120, 215,  // ingredient 2
      240, 140, 30,   // ingredient 3+
      30,  60,  150,  // agent 0
      0,   140, 140,  // agent 1
      0,   0,   0,
      255, 90,  160,  // timers, cooked mark
      110, 110, 110,  // other agents
  };
  return p;
}

Image render_image(const EnvConfig& config, const GameState& s, int tile) {
  if (tile < 4) throw InvalidArgument("tile size must be >= 4");
  const int n = config.num_ingredients();
  Canvas cv{{s.grid.width * tile, s.grid.height * tile, {}}, tile};
  cv.img.pixels.assign(static_cast<std::size_t>(cv.img.width * cv.img.height), kFloor);
  const int inner = tile - tile / 4;
  const int pad = (tile - inner) / 2;
  for (int y = 0; y < s.grid.height; ++y) {
    for (int x = 0; x < s.grid.width; ++x) {
      const std::size_t i = s.grid.index({x, y});
      const StaticCell cell = s.grid.statics[i];
      const int px = x * tile, py = y * tile;
      const std::int32_t timer = s.grid.timers[i];
      switch (cell.kind()) {
        case CellKind::Empty: break;
        case CellKind::Wall: cv.fill(px, py, tile, tile, kCounter); break;
        case CellKind::Delivery: cv.fill(px, py, tile, tile, kDelivery); break;
        case CellKind::Pot:
          cv.fill(px, py, tile, tile, kCounter);
          cv.fill(px + 1, py + 1, tile - 2, tile - 2, kPot);
          if (timer > 0) {
            const int len = std::max(1, (tile - 2) * timer / std::max(config.cook_time, 1));
            cv.fill(px + 1, py + 1, std::min(len, tile - 2), 2, kTimer);
          }
          break;
        case CellKind::RecipeIndicator:
          cv.fill(px, py, tile, tile, kIndicator);
          cv.recipe(px, py, s.recipe);
          break;
        case CellKind::ButtonRecipeIndicator:
          cv.fill(px, py, tile, tile, kButton);
          if (timer > 0) {
            cv.recipe(px, py, s.recipe);
            const int len = std::max(1, tile * timer / std::max(config.button_duration, 1));
            cv.fill(px, py + tile - 2, std::min(len, tile), 2, kTimer);
          }
          break;
        case CellKind::PlatePile:
          cv.fill(px, py, tile, tile, kCounter);
          cv.fill(px + pad, py + pad, inner, inner, kPlateColor);
          break;
        case CellKind::IngredientPile:
          cv.fill(px, py, tile, tile, kCounter);
          cv.fill(px + pad, py + pad, inner, inner, ingredient_color(cell.ingredient()));
          break;
      }
      if (cell.kind() != CellKind::PlatePile && cell.kind() != CellKind::IngredientPile) {
        cv.item(px + pad, py + pad, inner, s.grid.items[i], n);
      }
    }
  }
  for (std::size_t a = 0; a < s.agents.size(); ++a) {
    const AgentState& ag = s.agents[a];
    const int px = ag.pos.x * tile, py = ag.pos.y * tile;
    const Color body = a == 0 ? kAgent0 : a == 1 ? kAgent1 : kAgentOther;
    cv.fill(px + pad, py + pad, inner, inner, body);
    const int m = std::max(tile / 6, 1);
    const int mid = tile / 2 - m / 2;
    switch (ag.dir) {
      case Dir::Up: cv.fill(px + mid, py, m, pad + m, kBlack); break;
      case Dir::Down: cv.fill(px + mid, py + tile - pad - m, m, pad + m, kBlack); break;
      case Dir::Left: cv.fill(px, py + mid, pad + m, m, kBlack); break;
      case Dir::Right: cv.fill(px + tile - pad - m, py + mid, pad + m, m, kBlack); break;
    }
    const int held = inner / 2;
    cv.item(px + tile / 2 - held / 2, py + tile / 2 - held / 2, held, ag.inventory, n);
  }
  return cv.img;
}

namespace {

class BitWriter {
 public:
  void write(std::uint32_t code, int bits) {
    acc_ |= code << fill_;
    fill_ += bits;
    while (fill_ >= 8) {
      out.push_back(static_cast<std::uint8_t>(acc_ & 0xff));
      acc_ >>= 8;
      fill_ -= 8;
    }
  }
  void flush() {
    if (fill_ > 0) out.push_back(static_cast<std::uint8_t>(acc_ & 0xff));
    acc_ = 0;
    fill_ = 0;
  }
  std::vector<std::uint8_t> out;

 private:
  std::uint32_t acc_ = 0;
  int fill_ = 0;
};

constexpr int kMinCodeSize = 4;  // 16 colours

std::vector<std::uint8_t> lzw(const std::vector<std::uint8_t>& pixels) {
  constexpr std::uint32_t kClear = 1u << kMinCodeSize;
  constexpr std::uint32_t kEnd = kClear + 1;
  // children[code * 16 + colour] = code of (code, colour) or 0
  std::vector<std::uint16_t> children(4096 * 16, 0);
  BitWriter w;
  int size = kMinCodeSize + 1;
  std::uint32_t max_code = kEnd;
  w.write(kClear, size);
  if (pixels.empty()) {
    w.write(kEnd, size);
    w.flush();
    return w.out;
  }
  std::uint32_t cur = pixels[0];
  for (std::size_t k = 1; k < pixels.size(); ++k) {
    const std::uint8_t c = pixels[k];
    const std::uint16_t next = children[cur * 16 + c];
    if (next != 0) {
      cur = next;
      continue;
    }
    w.write(cur, size);
    children[cur * 16 + c] = static_cast<std::uint16_t>(++max_code);
    if (max_code >= (1u << size)) ++size;
    if (max_code == 4095) {
      w.write(kClear, size);
      std::fill(children.begin(), children.end(), 0);
      size = kMinCodeSize + 1;
      max_code = kEnd;
    }
    cur = c;
  }
  w.write(cur, size);
  w.write(kEnd, size);
  w.flush();
  return w.out;
}

void put16(std::vector<std::uint8_t>& out, int v) {
  out.push_back(static_cast<std::uint8_t>(v & 0xff));
  out.push_back(static_cast<std::uint8_t>((v >> 8) & 0xff));
}

}  // namespace

std::vector<std::uint8_t> encode_gif(const std::vector<Image>& frames, int delay_cs) {
  if (frames.empty()) throw InvalidArgument("encode_gif: no frames");
  const int w = frames.front().width, h = frames.front().height;
  if (w <= 0 || h <= 0 || w > 65535 || h > 65535) throw InvalidArgument("encode_gif: bad image size");
  std::vector<std::uint8_t> out = {'G', 'I', 'F', '8', '9', 'a'};
  put16(out, w);
  put16(out, h);
  out.push_back(0xF3);  // global table, 8-bit colour resolution, 16 entries
  out.push_back(0);
  out.push_back(0);
  const auto& pal = palette_rgb();
  out.insert(out.end(), pal.begin(), pal.end());
  const std::array<std::uint8_t, 19> loop = {0x21, 0xFF, 0x0B, 'N', 'E', 'T', 'S', 'C', 'A', 'P',
                                             'E', '2', '.', '0', 0x03, 0x01, 0x00, 0x00, 0x00};
  out.insert(out.end(), loop.begin(), loop.end());
  for (const Image& img : frames) {
    if (img.width != w || img.height != h) throw InvalidArgument("encode_gif: frames differ in size");
    out.insert(out.end(), {0x21, 0xF9, 0x04, 0x00});
    put16(out, delay_cs);
    out.insert(out.end(), {0x00, 0x00});
    out.push_back(0x2C);
    put16(out, 0);
    put16(out, 0);
    put16(out, w);
    put16(out, h);
    out.push_back(0);
    out.push_back(kMinCodeSize);
    const auto data = lzw(img.pixels);
    for (std::size_t k = 0; k < data.size(); k += 255) {
      const std::size_t len = std::min<std::size_t>(255, data.size() - k);
      out.push_back(static_cast<std::uint8_t>(len));
      out.insert(out.end(), data.begin() + static_cast<std::ptrdiff_t>(k),
                 data.begin() + static_cast<std::ptrdiff_t>(k + len));
    }
    out.push_back(0);
  }
  out.push_back(0x3B);
  return out;
}

}  // namespace ocv2
