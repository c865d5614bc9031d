#include "deadeye/png_io.hpp"

#include <png.h>

#include <cstdio>
#include <memory>
#include <string>
#include <vector>

#include "deadeye/error.hpp"

namespace deadeye {

namespace {

struct FileCloser {
  void operator()(std::FILE* f) const noexcept { std::fclose(f); }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

FilePtr open_file(const std::filesystem::path& path, const char* mode) {
  FilePtr f(std::fopen(path.c_str(), mode));
  if (!f) throw Error("cannot open " + path.string());
  return f;
}

// libpng prints to stderr by default; keep the message for the exception.
void on_png_error(png_structp png, png_const_charp msg) {
  if (auto* out = static_cast<std::string*>(png_get_error_ptr(png))) *out = msg;
  png_longjmp(png, 1);
}

void on_png_warning(png_structp, png_const_charp) {}

std::string detail(const std::string& msg) { return msg.empty() ? std::string() : ": " + msg; }

}  // namespace

void write_png(const std::filesystem::path& path, const Raster& raster) {
  FilePtr file = open_file(path, "wb");
  std::string message;
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, &message, on_png_error, on_png_warning);
  if (!png) throw Error("png: out of memory");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_write_struct(&png, nullptr);
    throw Error("png: out of memory");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw Error("png: failed writing " + path.string() + detail(message));
  }
  png_init_io(png, file.get());
  png_set_IHDR(png, info, raster.width(), raster.height(), 8, PNG_COLOR_TYPE_RGB,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  const auto* base = raster.pixels().data();
  for (int y = 0; y < raster.height(); ++y) {
    png_write_row(png, const_cast<png_bytep>(base + static_cast<std::size_t>(y) * raster.width() * 3));
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

Raster read_png(const std::filesystem::path& path) {
  FilePtr file = open_file(path, "rb");
  std::string message;
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, &message, on_png_error, on_png_warning);
  if (!png) throw Error("png: out of memory");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    throw Error("png: out of memory");
  }
  Raster out;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw Error("png: failed reading " + path.string() + detail(message));
  }
  png_init_io(png, file.get());
  png_read_info(png, info);
  png_set_strip_16(png);
  png_set_strip_alpha(png);
  png_set_palette_to_rgb(png);
  png_set_gray_to_rgb(png);
  png_read_update_info(png, info);
  const int w = static_cast<int>(png_get_image_width(png, info));
  const int h = static_cast<int>(png_get_image_height(png, info));
  out = Raster(w, h);
  for (int y = 0; y < h; ++y) {
    png_read_row(png, out.pixels().data() + static_cast<std::size_t>(y) * w * 3, nullptr);
  }
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  return out;
}

}  // namespace deadeye
