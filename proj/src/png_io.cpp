#include "sparsear/png_io.hpp"

#include <png.h>

#include <csetjmp>
#include <cstdio>
#include <memory>
#include <string>

#include "sparsear/error.hpp"

namespace sparsear::png {
namespace {

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f != nullptr) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

FilePtr open_or_throw(const std::filesystem::path& path, const char* mode, bool reading) {
  if (reading && !std::filesystem::exists(path)) {
    throw MissingFileError(path.string());
  }
  FilePtr f(std::fopen(path.string().c_str(), mode));
  if (!f) {
    throw IoError("cannot open " + path.string());
  }
  return f;
}

class Reader {
 public:
  explicit Reader(const std::filesystem::path& path)
      : path_(path), file_(open_or_throw(path, "rb", true)) {
    png_byte sig[8];
    if (std::fread(sig, 1, 8, file_.get()) != 8 || png_sig_cmp(sig, 0, 8) != 0) {
      throw IoError("not a PNG file: " + path.string());
    }
    png_ = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    info_ = png_ ? png_create_info_struct(png_) : nullptr;
    if (!png_ || !info_) {
      throw IoError("libpng initialization failed");
    }
  }
  ~Reader() { png_destroy_read_struct(&png_, &info_, nullptr); }
  Reader(const Reader&) = delete;
  Reader& operator=(const Reader&) = delete;

  /// Decodes into rows of `bytes_per_pixel`-wide pixels after applying
  /// the requested transformations.
  template <class Setup>
  std::vector<png_byte> decode(Setup&& setup, int& width, int& height, std::size_t& row_bytes) {
    std::vector<png_byte> data;
    std::vector<png_bytep> rows;
    if (setjmp(png_jmpbuf(png_))) {
      throw IoError("corrupt PNG: " + path_.string());
    }
    png_init_io(png_, file_.get());
    png_set_sig_bytes(png_, 8);
    png_read_info(png_, info_);
    setup(png_, info_);
    png_read_update_info(png_, info_);
    width = static_cast<int>(png_get_image_width(png_, info_));
    height = static_cast<int>(png_get_image_height(png_, info_));
    row_bytes = png_get_rowbytes(png_, info_);
    data.resize(row_bytes * static_cast<std::size_t>(height));
    rows.resize(static_cast<std::size_t>(height));
    for (int y = 0; y < height; ++y) rows[y] = data.data() + row_bytes * y;
    png_read_image(png_, rows.data());
    png_read_end(png_, nullptr);
    return data;
  }

 private:
  std::filesystem::path path_;
  FilePtr file_;
  png_structp png_ = nullptr;
  png_infop info_ = nullptr;
};

void write_png(const std::filesystem::path& path, int width, int height, int bit_depth,
               int color_type, const std::vector<png_bytep>& rows) {
  FilePtr file = open_or_throw(path, "wb", false);
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_write_struct(&png, &info);
    throw IoError("libpng initialization failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw IoError("failed writing " + path.string());
  }
  png_init_io(png, file.get());
  png_set_compression_level(png, 6);
  png_set_filter(png, PNG_FILTER_TYPE_BASE, PNG_FILTER_PAETH);
  png_set_IHDR(png, info, static_cast<png_uint_32>(width), static_cast<png_uint_32>(height),
               bit_depth, color_type, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  // 16-bit samples are big-endian in the file.
  if (bit_depth == 16) png_set_swap(png);
  png_write_image(png, const_cast<png_bytepp>(rows.data()));
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  if (std::fflush(file.get()) != 0) {
    throw IoError("failed flushing " + path.string());
  }
}

}  // namespace

Gray16 read_gray16(const std::filesystem::path& path) {
  Reader reader(path);
  int color_type = 0;
  int bit_depth = 0;
  int w = 0;
  int h = 0;
  std::size_t row_bytes = 0;
  auto data = reader.decode(
      [&](png_structp png, png_infop info) {
        color_type = png_get_color_type(png, info);
        bit_depth = png_get_bit_depth(png, info);
        if (color_type != PNG_COLOR_TYPE_GRAY || bit_depth != 16) {
          return;
        }
        png_set_swap(png);
      },
      w, h, row_bytes);
  if (color_type != PNG_COLOR_TYPE_GRAY || bit_depth != 16) {
    throw IoError("depth PNG must be 16-bit single-channel: " + path.string());
  }
  Gray16 out{w, h, std::vector<std::uint16_t>(static_cast<std::size_t>(w) * h)};
  for (int y = 0; y < h; ++y) {
    const auto* row = reinterpret_cast<const std::uint16_t*>(data.data() + row_bytes * y);
    std::copy(row, row + w, out.values.begin() + static_cast<std::ptrdiff_t>(y) * w);
  }
  return out;
}

void write_gray16(const Gray16& image, const std::filesystem::path& path) {
  std::vector<std::uint16_t> copy = image.values;
  std::vector<png_bytep> rows(static_cast<std::size_t>(image.height));
  for (int y = 0; y < image.height; ++y) {
    rows[y] = reinterpret_cast<png_bytep>(copy.data() + static_cast<std::size_t>(y) * image.width);
  }
  write_png(path, image.width, image.height, 16, PNG_COLOR_TYPE_GRAY, rows);
}

RgbImage read_rgb8(const std::filesystem::path& path) {
  Reader reader(path);
  int w = 0;
  int h = 0;
  std::size_t row_bytes = 0;
  auto data = reader.decode(
      [](png_structp png, png_infop info) {
        const int color_type = png_get_color_type(png, info);
        if (png_get_bit_depth(png, info) == 16) png_set_strip_16(png);
        if (color_type == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
        if (color_type == PNG_COLOR_TYPE_GRAY || color_type == PNG_COLOR_TYPE_GRAY_ALPHA) {
          png_set_expand_gray_1_2_4_to_8(png);
          png_set_gray_to_rgb(png);
        }
        if (color_type & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(png);
      },
      w, h, row_bytes);
  RgbImage out(w, h);
  for (int y = 0; y < h; ++y) {
    const png_byte* row = data.data() + row_bytes * y;
    for (int x = 0; x < w; ++x) {
      out.at(x, y) = {row[3 * x], row[3 * x + 1], row[3 * x + 2]};
    }
  }
  return out;
}

void write_rgb8(const RgbImage& image, const std::filesystem::path& path) {
  std::vector<png_byte> bytes(image.size() * 3);
  for (std::size_t i = 0; i < image.size(); ++i) {
    bytes[3 * i] = image[i][0];
    bytes[3 * i + 1] = image[i][1];
    bytes[3 * i + 2] = image[i][2];
  }
  std::vector<png_bytep> rows(static_cast<std::size_t>(image.height()));
  for (int y = 0; y < image.height(); ++y) {
    rows[y] = bytes.data() + static_cast<std::size_t>(y) * image.width() * 3;
  }
  write_png(path, image.width(), image.height(), 8, PNG_COLOR_TYPE_RGB, rows);
}

}  // namespace sparsear::png
