#pragma once

#include <span>
#include <vector>

#include "palletproj/error.hpp"

namespace palletproj {

struct Point2 {
  double u = 0.0;
  double v = 0.0;
};

// Line in normal form rho = u*cos(theta) + v*sin(theta). theta is the tilt
// from the image's vertical axis in degrees (theta = 0 is a vertical line,
// positive theta leans the top of the line toward +u), rho in pixels.
struct LineHypothesis {
  double rho = 0.0;
  double theta_deg = 0.0;
  int votes = 0;
};

struct HoughParams {
  double theta_window_deg = 15.0;
  double theta_step_deg = 0.1;
  double rho_step_px = 1.0;
  // Reference for the "closest to the center line" ordering: perpendicular
  // distance from this pixel to the hypothesis line.
  double center_u = 0.0;
  double center_v = 0.0;
  int max_hypotheses = 64;
};

// Accumulator vote over theta in [-window, +window] and quantized rho.
// Hypotheses are sorted by votes descending, then smaller |theta|, then
// smaller distance to the center pixel, then (theta, rho) for determinism.
std::vector<LineHypothesis> hough_lines(std::span<const Point2> points, const HoughParams &params);

// Perpendicular distance from the params' center pixel to a line.
double center_distance(const LineHypothesis &line, const HoughParams &params);

}  // namespace palletproj
