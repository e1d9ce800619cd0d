#include "palletproj/hough.hpp"

#include <algorithm>
#include <cmath>
#include <tuple>

#include "palletproj/vec3.hpp"

namespace palletproj {

double center_distance(const LineHypothesis &line, const HoughParams &params) {
  const double t = deg_to_rad(line.theta_deg);
  return std::abs(params.center_u * std::cos(t) + params.center_v * std::sin(t) - line.rho);
}

std::vector<LineHypothesis> hough_lines(std::span<const Point2> points, const HoughParams &params) {
  if (params.theta_step_deg <= 0.0 || params.rho_step_px <= 0.0 || params.theta_window_deg < 0.0)
    throw_error(ErrorCode::InvalidArgument, "hough steps must be positive");
  if (points.size() < 2)
    throw_error(ErrorCode::NoLine, "hough_lines needs at least 2 points");

  const int theta_bins = static_cast<int>(std::lround(2.0 * params.theta_window_deg / params.theta_step_deg)) + 1;

  // |rho| <= max |(u,v)| for any theta, so one symmetric range serves all bins.
  double max_r = 0.0;
  for (const Point2 &p : points) max_r = std::max(max_r, std::hypot(p.u, p.v));
  const long rho_half = std::lround(max_r / params.rho_step_px) + 1;
  const long rho_bins = 2 * rho_half + 1;

  std::vector<int> acc(static_cast<size_t>(theta_bins) * rho_bins, 0);
  std::vector<double> cos_t(theta_bins), sin_t(theta_bins), theta_deg(theta_bins);
  for (int k = 0; k < theta_bins; ++k) {
    theta_deg[k] = -params.theta_window_deg + k * params.theta_step_deg;
    const double t = deg_to_rad(theta_deg[k]);
    cos_t[k] = std::cos(t);
    sin_t[k] = std::sin(t);
  }

  for (const Point2 &p : points) {
    for (int k = 0; k < theta_bins; ++k) {
      const double rho = p.u * cos_t[k] + p.v * sin_t[k];
      const long bin = std::lround(rho / params.rho_step_px);
      acc[static_cast<size_t>(k) * rho_bins + (bin + rho_half)] += 1;
    }
  }

  int max_votes = 0;
  for (const int v : acc) max_votes = std::max(max_votes, v);
  if (max_votes < 1) throw_error(ErrorCode::NoLine, "no line hypothesis accumulated");
  const int vote_floor = std::max(1, max_votes / 4);

  std::vector<LineHypothesis> hyps;
  for (int k = 0; k < theta_bins; ++k) {
    for (long r = 0; r < rho_bins; ++r) {
      const int votes = acc[static_cast<size_t>(k) * rho_bins + r];
      if (votes < vote_floor) continue;
      hyps.push_back({(r - rho_half) * params.rho_step_px, theta_deg[k], votes});
    }
  }

  auto rank = [&params](const LineHypothesis &h) {
    return std::make_tuple(-h.votes, std::abs(h.theta_deg), center_distance(h, params),
                           h.theta_deg, h.rho);
  };
  std::sort(hyps.begin(), hyps.end(),
            [&rank](const LineHypothesis &a, const LineHypothesis &b) { return rank(a) < rank(b); });
  if (static_cast<int>(hyps.size()) > params.max_hypotheses) hyps.resize(params.max_hypotheses);
  return hyps;
}

}  // namespace palletproj
