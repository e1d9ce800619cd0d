#pragma once

#include <optional>
#include <span>
#include <vector>

#include "palletproj/equirect.hpp"
#include "palletproj/pallet_model.hpp"
#include "palletproj/plane.hpp"
#include "palletproj/pose.hpp"

namespace palletproj {

// Axis-aligned slab (shelf deck, beam, upright, wall...).
struct SceneBox {
  Vec3 min;
  Vec3 max;
  Vec3 color;
};

// Box-shaped pallet. The front face carries the two fork-hole rectangles in
// the hole color; everything else of the box renders in the face color.
struct ScenePallet {
  PalletSpec spec;
  PalletPose pose;
  Vec3 face_color{0.1, 0.1, 0.9};
  Vec3 hole_color{0.05, 0.05, 0.08};
  double body_depth_mm = 1100.0;
};

// Flat quad painted onto a surface: origin corner plus two edge vectors.
// Wins ties against coplanar geometry, like paint.
struct SceneStripe {
  Vec3 origin;
  Vec3 edge_u;
  Vec3 edge_v;
  Vec3 color;
};

struct SceneModel {
  Vec3 background{0.65, 0.65, 0.65};
  bool has_floor = true;
  double floor_z_mm = -1500.0;
  Vec3 floor_color{0.42, 0.42, 0.42};
  std::vector<SceneBox> boxes;
  std::vector<ScenePallet> pallets;
  std::vector<SceneStripe> stripes;
  double noise_amplitude = 0.0;  // additive uniform noise in [-a, a]
  unsigned long noise_seed = 1;
  int samples_per_pixel = 1;  // grid supersampling factor per axis
};

// Flat-shaded nearest-hit ray cast from the camera at the origin; one ray per
// sub-sample through pixel (i, j) at equirect coordinates (i + du, j + dv).
// Deterministic for a given scene, including the noise.
EquirectImage render_equirect(const SceneModel &scene, int width, int height,
                              int threads = 0);

struct GroundTruthEntry {
  PalletPose pose;
  bool below_camera = false;      // face center below z = 0
  PlaneHeight suggested_height;   // Bottom for below-camera pallets, else Top
};

GroundTruthEntry ground_truth(const SceneModel &scene, int pallet_index);

// Scenes seen from a camera that advanced by each offset along the aisle
// (+x): the world shifts since the camera stays the frame origin.
std::vector<SceneModel> trajectory_scenes(const SceneModel &base, std::span<const double> offsets_mm);

// Color seen along a single direction (used by tests as a ray oracle).
Vec3 trace_ray(const SceneModel &scene, const Vec3 &dir);

}  // namespace palletproj
