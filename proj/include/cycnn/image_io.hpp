#pragma once

#include <string>

#include "cycnn/polar.hpp"

namespace cycnn {

// Binary PGM (P5) -> 1 channel, PPM (P6) -> 3 channels; 8-bit only.
// Pixel values are scaled to [0, 1] on load and clamped back on save.
ImageGrid load_pnm(const std::string& path);
void save_pnm(const ImageGrid& img, const std::string& path);

}  // namespace cycnn
