#pragma once

#include <string>

#include "palletproj/raster.hpp"

namespace palletproj {

// Reads a PPM (P6), PGM (P5) or PNG image into a normalized raster
// (8-bit value / 255). Format is picked from the file contents.
RasterImage read_image(const std::string &path);

// Writes by extension: .ppm / .pgm (binary, maxval 255, bit-exact) or .png.
// Color images go to PPM/PNG-RGB, gray images to PGM/PNG-gray; a gray image
// written to .ppm is replicated to three channels.
void write_image(const std::string &path, const RasterImage &img);

}  // namespace palletproj
