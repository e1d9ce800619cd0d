#include "palletproj/equirect.hpp"

#include <algorithm>
#include <cmath>

namespace palletproj {

EquirectImage::EquirectImage(RasterImage img) : image(std::move(img)) {
  if (!image.is_color())
    throw_error(ErrorCode::InvalidArgument, "equirect image must be color");
  if (image.width != 2 * image.height)
    throw_error(ErrorCode::InvalidArgument, "equirect image must be 2:1 (full sphere)");
}

Point2 dir_to_pixel(const EquirectImage &eq, const Vec3 &dir) {
  const double n = dir.norm();
  if (!(n > 0.0) || !dir.finite())
    throw_error(ErrorCode::InvalidArgument, "direction must be a nonzero finite vector");
  const Vec3 d = dir / n;
  const double lambda = std::atan2(d.y, d.x);
  const double phi = std::asin(std::clamp(d.z, -1.0, 1.0));
  return {(lambda + kPi) / (2.0 * kPi) * eq.width(), (kPi / 2.0 - phi) / kPi * eq.height()};
}

Vec3 pixel_to_dir(const EquirectImage &eq, double u, double v) {
  const double lambda = u / eq.width() * 2.0 * kPi - kPi;
  const double phi = kPi / 2.0 - v / eq.height() * kPi;
  const double c = std::cos(phi);
  return {c * std::cos(lambda), c * std::sin(lambda), std::sin(phi)};
}

Vec3 sample_equirect(const EquirectImage &eq, const Point2 &uv) {
  return sample_bilinear_rgb(eq.image, uv.u, uv.v, /*wrap_x=*/true);
}

}  // namespace palletproj
