#include "palletproj/plane.hpp"

#include <algorithm>
#include <cmath>

#include "palletproj/pallet_model.hpp"
#include "palletproj/parallel.hpp"

namespace palletproj {

namespace {

int grid_dim(double extent_mm, double res_mm) {
  return std::max(1, static_cast<int>(std::lround(extent_mm / res_mm)));
}

}  // namespace

int PlaneSpec::cols() const { return grid_dim(width_mm, res_mm); }
int PlaneSpec::rows() const { return grid_dim(height_mm, res_mm); }

void PlaneSpec::validate() const {
  if (!(res_mm > 0.0)) throw_error(ErrorCode::InvalidArgument, "plane res_mm must be positive");
  if (!(width_mm > 0.0) || !(height_mm > 0.0))
    throw_error(ErrorCode::InvalidArgument, "plane extent must be positive");
  if (std::abs(ex.norm() - 1.0) > 1e-9 || std::abs(ey.norm() - 1.0) > 1e-9)
    throw_error(ErrorCode::InvalidArgument, "plane axes must be unit length");
  if (std::abs(ex.dot(ey)) > 1e-9)
    throw_error(ErrorCode::InvalidArgument, "plane axes must be orthogonal");
  if (!origin.finite())
    throw_error(ErrorCode::InvalidArgument, "plane origin must be finite");
}

Vec3 plane_pixel_to_world(const PlaneSpec &plane, double u, double v) {
  return plane.origin + (u - plane.cols() / 2.0) * plane.res_mm * plane.ex +
         (v - plane.rows() / 2.0) * plane.res_mm * plane.ey;
}

Point2 world_to_plane_pixel(const PlaneSpec &plane, const Vec3 &world) {
  const Vec3 d = world - plane.origin;
  return {d.dot(plane.ex) / plane.res_mm + plane.cols() / 2.0,
          d.dot(plane.ey) / plane.res_mm + plane.rows() / 2.0};
}

RasterImage project_plane(const EquirectImage &eq, const PlaneSpec &plane,
                          const ProjectionOptions &opts) {
  plane.validate();
  const Vec3 n = plane.normal().normalized();
  // Camera sits at the frame origin; |origin . n| is its distance from the
  // plane. A camera in the plane sees it edge-on and nothing projects.
  if (std::abs(plane.origin.dot(n)) <= opts.eps_plane_mm)
    throw_error(ErrorCode::DegenerateGeometry,
                "camera lies on (or within eps of) the projection plane");

  const int cols = plane.cols(), rows = plane.rows();
  RasterImage out = RasterImage::color(cols, rows);
  const bool rotate = !opts.ray_rotation.is_identity();

  parallel_for(0, rows, effective_threads(opts.threads), [&](int y0, int y1) {
    for (int y = y0; y < y1; ++y) {
      for (int x = 0; x < cols; ++x) {
        Vec3 dir = plane_pixel_to_world(plane, x, y);
        if (rotate) dir = opts.ray_rotation.apply(dir);
        out.set_rgb(x, y, sample_equirect(eq, dir_to_pixel(eq, dir)));
      }
    }
  });
  return out;
}

PlaneSpec make_shelf_plane(const Vec3 &origin, const Vec3 &outward_normal,
                           double width_mm, double height_mm, double res_mm) {
  if (std::abs(outward_normal.z) > 1e-9 || std::abs(outward_normal.norm() - 1.0) > 1e-9)
    throw_error(ErrorCode::InvalidArgument, "shelf normal must be horizontal and unit length");
  PlaneSpec p;
  p.origin = origin;
  p.ex = Vec3{0.0, 0.0, 1.0}.cross(outward_normal).normalized();
  p.ey = {0.0, 0.0, -1.0};
  p.width_mm = width_mm;
  p.height_mm = height_mm;
  p.res_mm = res_mm;
  p.validate();
  return p;
}

double shelf_plane_yaw_deg(const PlaneSpec &shelf) {
  // Outward normal of a shelf plane built by make_shelf_plane is ey x ex.
  const Vec3 n = shelf.ey.cross(shelf.ex);
  const double yaw = rad_to_deg(std::atan2(-n.y, -n.x));
  if (!(yaw > -90.0 && yaw < 90.0))
    throw_error(ErrorCode::DegenerateGeometry, "shelf plane faces away from the camera");
  return yaw;
}

const char *plane_height_name(PlaneHeight h) {
  switch (h) {
    case PlaneHeight::Bottom: return "bottom";
    case PlaneHeight::Top: return "top";
    case PlaneHeight::HoleTop: return "hole_top";
  }
  return "?";
}

double boundary_height_mm(const PalletPose &pose, const PalletSpec &spec, PlaneHeight which) {
  switch (which) {
    case PlaneHeight::Bottom: return pose.position.z - spec.height_mm / 2.0;
    case PlaneHeight::Top: return pose.position.z + spec.height_mm / 2.0;
    case PlaneHeight::HoleTop:
      return pose.position.z - spec.height_mm / 2.0 + spec.hole_bottom_mm + spec.hole_height_mm;
  }
  return pose.position.z;
}

PlaneSpec make_horizontal_plane(const PalletPose &pose, const PalletSpec &spec, PlaneHeight which,
                                double width_mm, double height_mm, double res_mm,
                                double h_min_mm) {
  pose.validate();
  const double z_p = boundary_height_mm(pose, spec, which);
  if (std::abs(z_p) < h_min_mm)
    throw_error(ErrorCode::SameHeight,
                "projection plane height within h_min of the camera; horizontal image is degenerate");
  PlaneSpec p;
  p.origin = {pose.position.x, pose.position.y, z_p};
  p.ex = pose.away_dir();
  p.ey = pose.face_normal().cross(Vec3{0.0, 0.0, 1.0});
  p.width_mm = width_mm;
  p.height_mm = height_mm;
  p.res_mm = res_mm;
  p.validate();
  return p;
}

PlaneSpec make_face_plane(const PalletPose &pose, double offset_mm,
                          double width_mm, double height_mm, double res_mm) {
  pose.validate();
  const Vec3 away = pose.away_dir();
  const double d0 = pose.position.dot(away);
  if (!(d0 > 0.0))
    throw_error(ErrorCode::DegenerateGeometry, "pallet face plane does not face the camera");
  const Vec3 ray = pose.position.normalized();
  const double along = ray.dot(away);
  if (std::abs(along) < 0.1)
    throw_error(ErrorCode::DegenerateGeometry, "view ray nearly parallel to the pallet face");

  PlaneSpec p;
  p.origin = ray * ((d0 + offset_mm) / along);
  p.ex = pose.edge_dir();
  p.ey = {0.0, 0.0, -1.0};
  p.width_mm = width_mm;
  p.height_mm = height_mm;
  p.res_mm = res_mm;
  p.validate();
  return p;
}

}  // namespace palletproj
