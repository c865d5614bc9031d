#pragma once

#include <filesystem>

#include "deadeye/raster.hpp"

namespace deadeye {

// 8-bit RGB PNG, lossless.
void write_png(const std::filesystem::path& path, const Raster& raster);
Raster read_png(const std::filesystem::path& path);

}  // namespace deadeye
