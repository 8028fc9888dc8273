#include <array>
#include <string>

#include "websynth/page.hpp"

namespace websynth {

namespace {

// 5x7 digit glyphs, one byte per row, low 5 bits used (MSB on the left).
constexpr std::array<std::array<std::uint8_t, 7>, 10> kDigits = {{
    {0x0E, 0x11, 0x13, 0x15, 0x19, 0x11, 0x0E},  // 0
    {0x04, 0x0C, 0x04, 0x04, 0x04, 0x04, 0x0E},  // 1
    {0x0E, 0x11, 0x01, 0x02, 0x04, 0x08, 0x1F},  // 2
    {0x1F, 0x02, 0x04, 0x02, 0x01, 0x11, 0x0E},  // 3
    {0x02, 0x06, 0x0A, 0x12, 0x1F, 0x02, 0x02},  // 4
    {0x1F, 0x10, 0x1E, 0x01, 0x01, 0x11, 0x0E},  // 5
    {0x06, 0x08, 0x10, 0x1E, 0x11, 0x11, 0x0E},  // 6
    {0x1F, 0x01, 0x02, 0x04, 0x08, 0x08, 0x08},  // 7
    {0x0E, 0x11, 0x11, 0x0E, 0x11, 0x11, 0x0E},  // 8
    {0x0E, 0x11, 0x11, 0x0F, 0x01, 0x02, 0x0C},  // 9
}};

// Drawing parameters. Golden images depend on these values.
constexpr int kBorder = 2;
constexpr int kGlyphScale = 2;
constexpr int kGlyphW = 5 * kGlyphScale;
constexpr int kGlyphH = 7 * kGlyphScale;
constexpr int kGlyphGap = kGlyphScale;
constexpr int kTagPad = 2;

constexpr std::array<Rgb, 8> kPalette = {{
    {230, 25, 75},
    {60, 180, 75},
    {0, 130, 200},
    {245, 130, 48},
    {145, 30, 180},
    {0, 128, 128},
    {170, 110, 40},
    {128, 0, 0},
}};

void draw_outline(Image& img, const BBox& b, Rgb c) {
  img.fill_rect(b.x, b.y, b.w, std::min(kBorder, b.h), c);
  img.fill_rect(b.x, b.y + b.h - std::min(kBorder, b.h), b.w, std::min(kBorder, b.h), c);
  img.fill_rect(b.x, b.y, std::min(kBorder, b.w), b.h, c);
  img.fill_rect(b.x + b.w - std::min(kBorder, b.w), b.y, std::min(kBorder, b.w), b.h, c);
}

void draw_tag(Image& img, int x, int y, const std::string& label, Rgb bg) {
  const int tag_w = kTagPad * 2 + static_cast<int>(label.size()) * (kGlyphW + kGlyphGap) - kGlyphGap;
  const int tag_h = kTagPad * 2 + kGlyphH;
  // Keep the tag on the canvas when the box hugs the right or bottom edge.
  x = std::max(0, std::min(x, img.width() - tag_w));
  y = std::max(0, std::min(y, img.height() - tag_h));
  img.fill_rect(x, y, tag_w, tag_h, bg);
  const Rgb fg{255, 255, 255};
  int gx = x + kTagPad;
  for (char ch : label) {
    const auto& glyph = kDigits[static_cast<std::size_t>(ch - '0')];
    for (int row = 0; row < 7; ++row) {
      for (int col = 0; col < 5; ++col) {
        if ((glyph[static_cast<std::size_t>(row)] >> (4 - col)) & 1) {
          img.fill_rect(gx + col * kGlyphScale, y + kTagPad + row * kGlyphScale, kGlyphScale,
                        kGlyphScale, fg);
        }
      }
    }
    gx += kGlyphW + kGlyphGap;
  }
}

}  // namespace

Image annotate_som(const Image& screenshot, const std::vector<ElementNode>& elements) {
  for (const auto& e : elements) {
    const auto& b = e.bbox;
    if (b.x < 0 || b.y < 0 || b.w < 0 || b.h < 0 || b.x + b.w > screenshot.width() ||
        b.y + b.h > screenshot.height()) {
      throw BboxOutOfBounds("element " + std::to_string(e.index.value) +
                            " box does not fit in the screenshot");
    }
  }
  Image out = screenshot;
  for (const auto& e : elements) {
    auto color = kPalette[e.index.value % kPalette.size()];
    draw_outline(out, e.bbox, color);
  }
  // Tags go on top of every outline so overlapping boxes never hide a number.
  for (const auto& e : elements) {
    auto color = kPalette[e.index.value % kPalette.size()];
    draw_tag(out, e.bbox.x, e.bbox.y, std::to_string(e.index.value), color);
  }
  return out;
}

}  // namespace websynth
