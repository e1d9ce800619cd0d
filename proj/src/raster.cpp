#include "palletproj/raster.hpp"

#include <algorithm>
#include <cmath>

namespace palletproj {

RasterImage::RasterImage(int w, int h, int c, float fill) {
  if (w < 1 || h < 1 || (c != 1 && c != 3))
    throw_error(ErrorCode::InvalidArgument, "raster dimensions must be >= 1x1 with 1 or 3 channels");
  width = w;
  height = h;
  channels = c;
  samples.assign(static_cast<size_t>(w) * h * c, fill);
}

RasterImage RasterImage::color(int w, int h, const Vec3 &fill) {
  RasterImage img(w, h, 3);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) img.set_rgb(x, y, fill);
  return img;
}

double channel_value(const Vec3 &rgb, Channel sel) {
  switch (sel) {
    case Channel::R: return rgb.x;
    case Channel::G: return rgb.y;
    case Channel::B: return rgb.z;
    case Channel::Luminance: return 0.299 * rgb.x + 0.587 * rgb.y + 0.114 * rgb.z;
  }
  return 0.0;
}

RasterImage extract_channel(const RasterImage &img, Channel sel) {
  if (!img.is_color())
    throw_error(ErrorCode::InvalidArgument, "extract_channel requires a 3-channel image");
  RasterImage out = RasterImage::gray(img.width, img.height);
  const size_t n = static_cast<size_t>(img.width) * img.height;
  for (size_t i = 0; i < n; ++i) {
    const Vec3 rgb{img.samples[i * 3], img.samples[i * 3 + 1], img.samples[i * 3 + 2]};
    out.samples[i] = static_cast<float>(channel_value(rgb, sel));
  }
  return out;
}

namespace {

inline int wrap_index(long i, int n) {
  long r = i % n;
  if (r < 0) r += n;
  return static_cast<int>(r);
}

}  // namespace

double sample_bilinear(const RasterImage &img, double x, double y, int channel,
                       bool wrap_x) {
  const int w = img.width, h = img.height;

  double fy = std::clamp(y, 0.0, static_cast<double>(h - 1));
  int y0 = static_cast<int>(std::floor(fy));
  int y1 = std::min(y0 + 1, h - 1);
  const double dy = fy - y0;

  int x0, x1;
  double dx;
  if (wrap_x) {
    const double fx = x - std::floor(x / w) * w;  // lift into [0, w)
    x0 = wrap_index(static_cast<long>(std::floor(fx)), w);
    x1 = wrap_index(static_cast<long>(std::floor(fx)) + 1, w);
    dx = fx - std::floor(fx);
  } else {
    const double fx = std::clamp(x, 0.0, static_cast<double>(w - 1));
    x0 = static_cast<int>(std::floor(fx));
    x1 = std::min(x0 + 1, w - 1);
    dx = fx - x0;
  }

  const double v00 = img.at(x0, y0, channel);
  const double v10 = img.at(x1, y0, channel);
  const double v01 = img.at(x0, y1, channel);
  const double v11 = img.at(x1, y1, channel);
  const double top = v00 + dx * (v10 - v00);
  const double bot = v01 + dx * (v11 - v01);
  return top + dy * (bot - top);
}

Vec3 sample_bilinear_rgb(const RasterImage &img, double x, double y, bool wrap_x) {
  return {sample_bilinear(img, x, y, 0, wrap_x),
          img.channels > 1 ? sample_bilinear(img, x, y, 1, wrap_x) : sample_bilinear(img, x, y, 0, wrap_x),
          img.channels > 2 ? sample_bilinear(img, x, y, 2, wrap_x) : sample_bilinear(img, x, y, 0, wrap_x)};
}

RasterImage sobel_magnitude(const RasterImage &img) {
  if (!img.is_gray())
    throw_error(ErrorCode::InvalidArgument, "sobel_magnitude requires a gray image");
  if (img.width < 3 || img.height < 3)
    throw_error(ErrorCode::InvalidArgument, "sobel_magnitude requires at least 3x3");

  RasterImage out = RasterImage::gray(img.width, img.height, 0.0f);
  for (int y = 1; y < img.height - 1; ++y) {
    for (int x = 1; x < img.width - 1; ++x) {
      const double a = img.at(x - 1, y - 1), b = img.at(x, y - 1), c = img.at(x + 1, y - 1);
      const double d = img.at(x - 1, y), f = img.at(x + 1, y);
      const double g = img.at(x - 1, y + 1), hh = img.at(x, y + 1), i = img.at(x + 1, y + 1);
      const double gx = (c - a) + 2.0 * (f - d) + (i - g);
      const double gy = (g - a) + 2.0 * (hh - b) + (i - c);
      out.at(x, y) = static_cast<float>(std::sqrt(gx * gx + gy * gy) / kSobelMaxMagnitude);
    }
  }
  return out;
}

}  // namespace palletproj
