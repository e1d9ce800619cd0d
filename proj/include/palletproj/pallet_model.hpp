#pragma once

#include <vector>

#include "palletproj/hough.hpp"
#include "palletproj/raster.hpp"

namespace palletproj {

// Front-face geometry of a pallet, full scale in millimetres. The two fork
// holes are symmetric about the face's vertical centerline.
struct PalletSpec {
  double width_mm = 1100.0;
  double height_mm = 144.0;
  double hole_width_mm = 240.0;
  double hole_height_mm = 100.0;
  double hole_offset_mm = 600.0;  // center-to-center distance of the holes
  double hole_bottom_mm = 22.0;   // hole bottom above the pallet bottom
  double corner_radius_mm = 40.0;

  void validate() const;
};

// Expected contour pixels of the full-scale face at a given resolution:
// outer rectangle plus both hole rectangles, sampled at ~1 px spacing, as
// (u, v) offsets from the face center (u right, v down). Points within
// corner_radius of a rounded outer corner are omitted.
struct EdgeTemplate {
  double res_mm = 1.0;
  std::vector<Point2> points;

  int count() const { return static_cast<int>(points.size()); }
};

EdgeTemplate build_edge_template(const PalletSpec &spec, double res_mm);

// Edge-support score in [0,1]: mean over template points of
// min(1, edge / tau_edge) sampled bilinearly at point + offset. Points
// outside the image contribute 0. Reaches 1 only when every point sits on an
// edge of at least tau_edge.
double match_score(const RasterImage &edges, const EdgeTemplate &tmpl, Point2 offset,
                   double tau_edge);

struct TemplateMatch {
  Point2 offset;  // face-center position in the edge image, pixels
  double score = 0.0;
};

struct TemplateSearchParams {
  double stride_px = 4.0;
  double theta_detect = 0.6;
  double tau_edge = 0.2;
  int threads = 0;
};

// Dense scan at `stride_px` followed by stride-1 hill climbing; returns
// non-overlapping local maxima with score >= theta_detect, best first.
std::vector<TemplateMatch> template_search(const RasterImage &edges, const EdgeTemplate &tmpl,
                                           const TemplateSearchParams &params);

}  // namespace palletproj
