#pragma once

#include <vector>

#include "palletproj/pallet_model.hpp"
#include "palletproj/plane.hpp"
#include "palletproj/pose.hpp"

namespace palletproj {

struct Detection {
  PalletPose pose;     // face center on the detection plane, yaw of that plane
  double score = 0.0;  // edge-support match score at the detection
  PlaneSpec plane;
  Point2 offset_px;    // face-center position in the projected image
};

struct DetectParams {
  Channel channel = Channel::Luminance;
  double tau_edge = 0.2;
  double theta_detect = 0.6;
  double stride_px = 4.0;
  ProjectionOptions projection;
  int threads = 0;
};

// Initial detection on the shelf-front plane: project, take the configured
// channel, edge-detect, and template-match the full-scale face model. Yaw is
// the shelf plane's: pallet fronts are assumed approximately coplanar with
// the shelf front, which is exactly why the result is only an initial
// estimate.
std::vector<Detection> detect_pallets(const EquirectImage &eq, const PlaneSpec &shelf,
                                      const PalletSpec &spec, const DetectParams &params);

// The detection pose is already the initial estimate consumed by the
// localization stage; this spells that out at the call sites.
inline PalletPose detection_to_initial_pose(const Detection &d) { return d.pose; }

}  // namespace palletproj
