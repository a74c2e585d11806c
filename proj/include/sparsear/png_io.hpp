#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "sparsear/image.hpp"

namespace sparsear::png {

struct Gray16 {
  int width = 0;
  int height = 0;
  std::vector<std::uint16_t> values;
};

/// Throws MissingFileError / IoError.
Gray16 read_gray16(const std::filesystem::path& path);
void write_gray16(const Gray16& image, const std::filesystem::path& path);

/// Gray and RGBA inputs are converted to RGB; 16-bit channels are reduced to 8.
RgbImage read_rgb8(const std::filesystem::path& path);
void write_rgb8(const RgbImage& image, const std::filesystem::path& path);

}  // namespace sparsear::png
