#include "websynth/image.hpp"

#include <png.h>

#include <algorithm>
#include <cstring>

#include "websynth/util.hpp"

namespace websynth {

Image::Image(int width, int height, Rgb fill) : width_(width), height_(height) {
  if (width < 0 || height < 0) throw ImageError("negative image dimensions");
  pixels_.resize(static_cast<std::size_t>(width) * height * 3);
  for (std::size_t i = 0; i < pixels_.size(); i += 3) {
    pixels_[i] = fill.r;
    pixels_[i + 1] = fill.g;
    pixels_[i + 2] = fill.b;
  }
}

Rgb Image::at(int x, int y) const {
  auto i = (static_cast<std::size_t>(y) * width_ + x) * 3;
  return {pixels_[i], pixels_[i + 1], pixels_[i + 2]};
}

void Image::set(int x, int y, Rgb c) {
  if (x < 0 || y < 0 || x >= width_ || y >= height_) return;
  auto i = (static_cast<std::size_t>(y) * width_ + x) * 3;
  pixels_[i] = c.r;
  pixels_[i + 1] = c.g;
  pixels_[i + 2] = c.b;
}

void Image::fill_rect(int x, int y, int w, int h, Rgb c) {
  int x0 = std::max(0, x);
  int y0 = std::max(0, y);
  int x1 = std::min(width_, x + w);
  int y1 = std::min(height_, y + h);
  for (int yy = y0; yy < y1; ++yy) {
    for (int xx = x0; xx < x1; ++xx) set(xx, yy, c);
  }
}

Image Image::crop(int x, int y, int w, int h, Rgb pad) const {
  Image out(w, h, pad);
  for (int yy = 0; yy < h; ++yy) {
    int sy = y + yy;
    if (sy < 0 || sy >= height_) continue;
    int sx0 = std::max(0, x);
    int sx1 = std::min(width_, x + w);
    if (sx0 >= sx1) continue;
    auto src = (static_cast<std::size_t>(sy) * width_ + sx0) * 3;
    auto dst = (static_cast<std::size_t>(yy) * w + (sx0 - x)) * 3;
    std::memcpy(&out.pixels_[dst], &pixels_[src], static_cast<std::size_t>(sx1 - sx0) * 3);
  }
  return out;
}

std::string Image::digest() const {
  std::string buf = std::to_string(width_) + "x" + std::to_string(height_) + ":";
  buf.append(reinterpret_cast<const char*>(pixels_.data()), pixels_.size());
  return sha256_hex(buf);
}

std::vector<std::uint8_t> encode_png(const Image& image) {
  png_image info{};
  info.version = PNG_IMAGE_VERSION;
  info.width = static_cast<png_uint_32>(image.width());
  info.height = static_cast<png_uint_32>(image.height());
  info.format = PNG_FORMAT_RGB;
  png_alloc_size_t size = 0;
  if (!png_image_write_to_memory(&info, nullptr, &size, 0, image.pixels().data(), 0, nullptr)) {
    throw ImageError(std::string("png encode failed: ") + info.message);
  }
  std::vector<std::uint8_t> out(size);
  if (!png_image_write_to_memory(&info, out.data(), &size, 0, image.pixels().data(), 0, nullptr)) {
    throw ImageError(std::string("png encode failed: ") + info.message);
  }
  out.resize(size);
  return out;
}

Image decode_png(std::span<const std::uint8_t> data) {
  png_image info{};
  info.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_memory(&info, data.data(), data.size())) {
    throw ImageError(std::string("png decode failed: ") + info.message);
  }
  info.format = PNG_FORMAT_RGB;
  Image out(static_cast<int>(info.width), static_cast<int>(info.height));
  png_color white{255, 255, 255};
  if (!png_image_finish_read(&info, &white, out.pixels().data(), 0, nullptr)) {
    png_image_free(&info);
    throw ImageError(std::string("png decode failed: ") + info.message);
  }
  return out;
}

void write_png(const std::filesystem::path& path, const Image& image) {
  auto bytes = encode_png(image);
  write_file_atomic(path, std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()));
}

Image read_png(const std::filesystem::path& path) {
  auto raw = read_file(path);
  return decode_png(std::span(reinterpret_cast<const std::uint8_t*>(raw.data()), raw.size()));
}

}  // namespace websynth
