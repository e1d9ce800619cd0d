#pragma once

#include <functional>
#include <string>
#include <vector>

#include "palletproj/detect.hpp"
#include "palletproj/pallet_model.hpp"
#include "palletproj/plane.hpp"
#include "palletproj/pose.hpp"

namespace palletproj {

enum class BoundaryMethod { FlankThreshold, EdgeHough };

// Result of extracting the pallet/background boundary line from a horizontal
// plane projection. delta_yaw_deg is the line's signed tilt from the image's
// center column, which equals the yaw error of the pose the plane was built
// from.
struct BoundaryExtraction {
  BoundaryMethod method = BoundaryMethod::FlankThreshold;
  std::vector<Point2> candidates;
  LineHypothesis line;
  double delta_yaw_deg = 0.0;
};

struct DepthProfile {
  std::vector<double> offsets_mm;  // strictly increasing plane displacements
  std::vector<double> scores;
  double best_offset_mm = 0.0;
  double best_score = 0.0;
};

struct BoundaryParams {
  HoughParams hough;
  double contrast_min = 0.05;
  int flank_width_px = 20;
  int flank_height_px = 100;
  double tau_edge = 0.2;   // edge_hough candidate threshold
  // Candidate row band [row_begin, row_end); negative = full image.
  int row_begin = -1;
  int row_end = -1;
};

struct LocalizeParams {
  Channel channel = Channel::Luminance;
  BoundaryMethod boundary_method = BoundaryMethod::FlankThreshold;
  HoughParams hough{15.0, 0.1, 1.0};
  double contrast_min = 0.05;
  int flank_width_px = 20;
  int flank_height_px = 100;
  double h_min_mm = 100.0;
  bool prefer_hole_top = false;
  bool hole_top_fallback = true;
  double residual_tol_deg = 0.5;

  // Horizontal-plane sampling: width spans the boundary (columns), the rows
  // cover the pallet width plus a margin at each end.
  double hplane_width_mm = 600.0;
  double hplane_margin_mm = 300.0;
  double hplane_res_mm = 5.0;

  // Depth sweep.
  double range_lo_mm = -150.0;
  double range_hi_mm = 550.0;
  double coarse_step_mm = 20.0;
  double fine_step_mm = 2.0;
  int search_px = 30;  // in-plane search radius for the locate pass, pixels
  double tau_edge = 0.2;
  double theta_detect = 0.6;
  double face_plane_margin_mm = 200.0;
  double face_plane_res_mm = 5.0;       // locate pass
  double face_plane_fine_res_mm = 2.5;  // scoring/profile pass

  ProjectionOptions projection;
  int threads = 0;
};

// Picks which horizontal boundary to project through. Bottom when the pallet
// sits below the camera, top when above; the fork-hole top edge when
// configured to prefer it or when the caller flags the face boundary as
// low-contrast. Throws same-height when every candidate is within h_min of
// the camera height.
PlaneHeight select_plane_height(const PalletPose &pose, const PalletSpec &spec,
                                const LocalizeParams &params, bool low_contrast_flag = false);

// Boundary extraction from mean-intensity flanking regions: threshold at the
// midpoint of the two flank means, raster-scan each row from the pallet side
// (+u) toward the background, take the first threshold crossing (sub-pixel),
// then fit a line by Hough.
BoundaryExtraction extract_boundary_flank(const RasterImage &gray, const BoundaryParams &params);

// Boundary extraction via Sobel edges, Hough, and the closest-to-center-line
// selection among hypotheses of comparable support.
BoundaryExtraction extract_boundary_edge(const RasterImage &gray, const BoundaryParams &params);

struct YawEstimate {
  PalletPose pose;  // input pose with the yaw correction applied
  BoundaryExtraction boundary;
  PlaneHeight height_used = PlaneHeight::Bottom;
  PlaneSpec plane;
};

// Yaw stage: horizontal-plane projection through the selected boundary,
// boundary-line extraction, then yaw_deg += delta_yaw. Falls back to the
// fork-hole top edge on a low-contrast face boundary when enabled.
YawEstimate estimate_yaw(const EquirectImage &eq, const PalletPose &pose, const PalletSpec &spec,
                         const LocalizeParams &params);

// Optional observer for the depth sweep (debug dumps).
using SweepObserver = std::function<void(double offset_mm, const RasterImage &projection)>;

// Position stage: the face plane of the yaw-corrected pose is swept along
// its normal (coarse then fine) and the projection is scored against the
// full-scale edge template with a small in-plane search; the best plane
// fixes the position.
std::pair<PalletPose, DepthProfile> search_depth(const EquirectImage &eq, const PalletPose &pose,
                                                 const PalletSpec &spec, const LocalizeParams &params,
                                                 const SweepObserver &observer = nullptr);

struct LocalizeResult {
  PalletPose pose;
  BoundaryExtraction boundary;
  PlaneHeight height_used = PlaneHeight::Bottom;
  DepthProfile profile;
  double score = 0.0;
  double yaw_ms = 0.0;
  double position_ms = 0.0;
};

struct LocalizeDebug {
  std::function<void(const std::string &name, const RasterImage &img)> image;
  std::function<void(const std::string &name, const std::string &content)> text;
};

// Full localization: yaw first, then depth, with per-stage wall-clock
// timings. Stage errors propagate with a stage tag in the message.
LocalizeResult localize_pallet(const EquirectImage &eq, const PalletPose &initial,
                               const PalletSpec &spec, const LocalizeParams &params,
                               const LocalizeDebug *debug = nullptr);

}  // namespace palletproj
