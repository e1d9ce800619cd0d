#pragma once

#include "palletproj/error.hpp"
#include "palletproj/vec3.hpp"

namespace palletproj {

// All geometry lives in the camera frame: x forward, y left, z up, origin at
// the camera's optical center, millimetres. The frame never changes within a
// run; moving the vehicle means translating the scene.

// Pose of a pallet: `position` is the center of the front face, `yaw_deg`
// rotates the face about the vertical axis. At yaw 0 the front face is
// parallel to the canonical shelf front (outward normal -x, i.e. facing the
// camera); positive yaw turns the outward normal toward -y.
struct PalletPose {
  Vec3 position;
  double yaw_deg = 0.0;

  // Outward normal of the front face (points toward the camera side).
  Vec3 face_normal() const { return rotate_z({-1.0, 0.0, 0.0}, yaw_deg); }
  // Horizontal direction along the face, z x normal.
  Vec3 edge_dir() const { return Vec3{0.0, 0.0, 1.0}.cross(face_normal()); }
  // Horizontal direction from the camera side into the pallet.
  Vec3 away_dir() const { return -face_normal(); }

  void validate() const {
    if (!position.finite())
      throw_error(ErrorCode::InvalidArgument, "pose position must be finite");
    if (!(yaw_deg > -90.0 && yaw_deg < 90.0))
      throw_error(ErrorCode::InvalidArgument, "yaw_deg must lie in (-90, 90)");
  }
};

}  // namespace palletproj
