#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace progeo::util {

// 8-bit interleaved RGB raster.
struct Image {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> rgb;  // width * height * 3

  Image() = default;
  Image(int w, int h, std::uint8_t fill = 0)
      : width(w), height(h), rgb(static_cast<std::size_t>(w) * h * 3, fill) {}

  std::uint8_t* at(int x, int y) {
    return rgb.data() + (static_cast<std::size_t>(y) * width + x) * 3;
  }
  const std::uint8_t* at(int x, int y) const {
    return rgb.data() + (static_cast<std::size_t>(y) * width + x) * 3;
  }
  void set(int x, int y, std::uint8_t r, std::uint8_t g, std::uint8_t b) {
    auto* p = at(x, y);
    p[0] = r;
    p[1] = g;
    p[2] = b;
  }
};

void write_png(const Image& img, const std::string& path);
Image read_png(const std::string& path);

// Copies src into dst with its top-left corner at (x0, y0); clips at borders.
void blit(Image& dst, const Image& src, int x0, int y0);

// Draws an axis-aligned frame of the given thickness just inside the rect.
void draw_border(Image& img, int x0, int y0, int w, int h, int thickness,
                 std::uint8_t r, std::uint8_t g, std::uint8_t b);

void draw_line(Image& img, int x0, int y0, int x1, int y1,
               std::uint8_t r, std::uint8_t g, std::uint8_t b);

void draw_disc(Image& img, int cx, int cy, int radius,
               std::uint8_t r, std::uint8_t g, std::uint8_t b);

// 5x7 bitmap font; supports digits, A-Z (upper-cased), and ., - % / _ space.
void draw_text(Image& img, int x, int y, const std::string& text,
               std::uint8_t r, std::uint8_t g, std::uint8_t b, int scale = 1);

}  // namespace progeo::util
