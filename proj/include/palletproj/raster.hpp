#pragma once

#include <cstddef>
#include <vector>

#include "palletproj/error.hpp"
#include "palletproj/vec3.hpp"

namespace palletproj {

enum class Channel { R, G, B, Luminance };

// Intensity raster, 1 (gray) or 3 (RGB) interleaved channels, row-major,
// values normalized to [0,1]. Stored as float; all arithmetic on samples is
// done in double.
struct RasterImage {
  int width = 0;
  int height = 0;
  int channels = 1;
  std::vector<float> samples;

  RasterImage() = default;
  RasterImage(int w, int h, int c, float fill = 0.0f);

  static RasterImage gray(int w, int h, float fill = 0.0f) { return {w, h, 1, fill}; }
  static RasterImage color(int w, int h, const Vec3 &fill = {});

  bool is_gray() const { return channels == 1; }
  bool is_color() const { return channels == 3; }

  float &at(int x, int y, int c = 0) {
    return samples[(static_cast<size_t>(y) * width + x) * channels + c];
  }
  float at(int x, int y, int c = 0) const {
    return samples[(static_cast<size_t>(y) * width + x) * channels + c];
  }
  void set_rgb(int x, int y, const Vec3 &rgb) {
    at(x, y, 0) = static_cast<float>(rgb.x);
    at(x, y, 1) = static_cast<float>(rgb.y);
    at(x, y, 2) = static_cast<float>(rgb.z);
  }
  Vec3 rgb(int x, int y) const {
    return {at(x, y, 0), at(x, y, 1), at(x, y, 2)};
  }
};

// Single-channel view of a color image. Luminance uses the Rec.601 weights
// 0.299 R + 0.587 G + 0.114 B.
RasterImage extract_channel(const RasterImage &img, Channel sel);

double channel_value(const Vec3 &rgb, Channel sel);

// Bilinear sample at sub-pixel (x, y); pixel centers sit on integer
// coordinates. Out-of-range coordinates clamp to the border, except that
// wrap_x makes the horizontal axis periodic (equirectangular longitude).
double sample_bilinear(const RasterImage &img, double x, double y, int channel = 0,
                       bool wrap_x = false);
Vec3 sample_bilinear_rgb(const RasterImage &img, double x, double y, bool wrap_x = false);

// Gradient magnitude from the 3x3 Sobel pair, scaled so the largest response
// the operator can produce on a [0,1] image maps to 1.0. Border is zero.
RasterImage sobel_magnitude(const RasterImage &img);

// Largest value of sqrt(gx^2 + gy^2) attainable with samples in [0,1]
// (gx = +/-4 forces the perpendicular kernel to at most +/-2).
inline constexpr double kSobelMaxMagnitude = 4.47213595499957939282;  // sqrt(20)

}  // namespace palletproj
