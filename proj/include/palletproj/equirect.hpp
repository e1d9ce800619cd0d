#pragma once

#include "palletproj/hough.hpp"
#include "palletproj/raster.hpp"

namespace palletproj {

// Full-sphere equirectangular panorama. Longitude lambda in [-pi, pi) runs
// left to right across the columns, latitude phi in [-pi/2, pi/2] runs bottom
// to top, so row 0 looks straight up. Width must be twice the height.
struct EquirectImage {
  RasterImage image;

  EquirectImage() = default;
  explicit EquirectImage(RasterImage img);

  int width() const { return image.width; }
  int height() const { return image.height; }
};

// Maps a unit direction to sub-pixel equirect coordinates:
//   lambda = atan2(y, x), phi = asin(z),
//   u = (lambda + pi) / 2pi * width, v = (pi/2 - phi) / pi * height.
Point2 dir_to_pixel(const EquirectImage &eq, const Vec3 &dir);

// Inverse of dir_to_pixel; exact away from the poles.
Vec3 pixel_to_dir(const EquirectImage &eq, double u, double v);

// Bilinear color lookup with periodic longitude.
Vec3 sample_equirect(const EquirectImage &eq, const Point2 &uv);

}  // namespace palletproj
