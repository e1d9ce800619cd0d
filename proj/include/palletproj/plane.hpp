#pragma once

#include "palletproj/equirect.hpp"
#include "palletproj/pose.hpp"

namespace palletproj {

struct PalletSpec;

// Metric sampling grid on a 3D plane. `origin` maps to the image's center
// pixel (cols/2, rows/2); `ex` runs along columns and `ey` along rows, both
// unit and orthogonal; `res_mm` is millimetres per pixel.
struct PlaneSpec {
  Vec3 origin;
  Vec3 ex;
  Vec3 ey;
  double width_mm = 0.0;
  double height_mm = 0.0;
  double res_mm = 1.0;

  int cols() const;
  int rows() const;
  Vec3 normal() const { return ex.cross(ey); }
  void validate() const;
};

struct ProjectionOptions {
  // Optional camera mount rotation applied to every ray (tilt support).
  Mat3 ray_rotation;
  // Minimum camera-to-plane distance before projection is declared
  // degenerate.
  double eps_plane_mm = 50.0;
  int threads = 0;
};

Vec3 plane_pixel_to_world(const PlaneSpec &plane, double u, double v);

// Inverse of plane_pixel_to_world for points in (or near) the plane.
Point2 world_to_plane_pixel(const PlaneSpec &plane, const Vec3 &world);

// Resamples the panorama onto the plane grid: each output pixel takes the
// bilinear equirect sample along the ray through its world point.
RasterImage project_plane(const EquirectImage &eq, const PlaneSpec &plane,
                          const ProjectionOptions &opts = {});

// Vertical plane of a shelf front from an origin point and a horizontal
// outward normal. ex = z x normal (so the image reads unmirrored when viewed
// from the camera side), ey = -z.
PlaneSpec make_shelf_plane(const Vec3 &origin, const Vec3 &outward_normal,
                           double width_mm, double height_mm, double res_mm);

// Yaw angle (about z, relative to the canonical -x facing) of a vertical
// plane's outward normal.
double shelf_plane_yaw_deg(const PlaneSpec &shelf);

enum class PlaneHeight { Bottom, Top, HoleTop };

const char *plane_height_name(PlaneHeight h);

// Height of the selected boundary (mm, camera frame) for a pose/spec pair.
double boundary_height_mm(const PalletPose &pose, const PalletSpec &spec, PlaneHeight which);

// Horizontal plane through the selected front-face boundary edge. The image's
// center column coincides with the edge line: origin is the edge point
// nearest the face center, ey runs along the edge, ex points away from the
// camera. Throws degenerate-height when |z| < h_min_mm.
PlaneSpec make_horizontal_plane(const PalletPose &pose, const PalletSpec &spec, PlaneHeight which,
                                double width_mm, double height_mm, double res_mm,
                                double h_min_mm = 100.0);

// Vertical plane parallel to the pallet front face, displaced by `offset_mm`
// along the face's inward normal. The grid origin slides along the camera ray
// through the pose center, which keeps the pallet centered in the image while
// the plane is moved forward and backward.
PlaneSpec make_face_plane(const PalletPose &pose, double offset_mm,
                          double width_mm, double height_mm, double res_mm);

}  // namespace palletproj
