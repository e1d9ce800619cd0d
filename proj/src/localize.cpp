#include "palletproj/localize.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "palletproj/parallel.hpp"

namespace palletproj {

PlaneHeight select_plane_height(const PalletPose &pose, const PalletSpec &spec,
                                const LocalizeParams &params, bool low_contrast_flag) {
  const double h = params.h_min_mm;
  const double z_bottom = boundary_height_mm(pose, spec, PlaneHeight::Bottom);
  const double z_top = boundary_height_mm(pose, spec, PlaneHeight::Top);
  const double z_hole = boundary_height_mm(pose, spec, PlaneHeight::HoleTop);

  if ((params.prefer_hole_top || low_contrast_flag) && std::abs(z_hole) >= h)
    return PlaneHeight::HoleTop;
  if (z_bottom <= -h) return PlaneHeight::Bottom;
  if (z_top >= h) return PlaneHeight::Top;
  throw_error(ErrorCode::SameHeight,
              "pallet straddles the camera height; no usable horizontal plane");
}

namespace {

struct RowBand {
  int begin, end;
};

RowBand resolve_band(const RasterImage &img, const BoundaryParams &p) {
  RowBand band{p.row_begin, p.row_end};
  if (band.begin < 0 || band.end < 0) {
    band.begin = 1;
    band.end = img.height - 1;
  }
  band.begin = std::clamp(band.begin, 0, img.height);
  band.end = std::clamp(band.end, band.begin, img.height);
  return band;
}

// Least-squares refinement of a near-vertical Hough line: fit u = a + b*v to
// the candidates supporting the line, then convert back to (rho, theta).
// Recovers the sub-bin tilt the accumulator cannot resolve. Two rounds with
// a shrinking support window keep the fitted subset stable when candidate
// noise exceeds the rho quantization.
LineHypothesis refine_line(const std::vector<Point2> &candidates, const LineHypothesis &line,
                           double rho_step, double theta_window_deg) {
  LineHypothesis current = line;
  for (const double window : {4.0 * rho_step, 2.0 * rho_step}) {
    const double t = deg_to_rad(current.theta_deg);
    const double ct = std::cos(t), st = std::sin(t);
    double n = 0, su = 0, sv = 0, suv = 0, svv = 0;
    for (const Point2 &p : candidates) {
      if (std::abs(p.u * ct + p.v * st - current.rho) > window) continue;
      n += 1;
      su += p.u;
      sv += p.v;
      suv += p.u * p.v;
      svv += p.v * p.v;
    }
    if (n < 2) return current;
    const double denom = svv - sv * sv / n;
    if (denom <= 1e-9) return current;
    const double b = (suv - su * sv / n) / denom;
    const double a = (su - b * sv) / n;
    const double theta = std::atan(-b);
    current.theta_deg = rad_to_deg(theta);
    current.rho = a * std::cos(theta);
  }
  // The fit stays a refinement: near its bin and inside the search window.
  current.theta_deg = std::clamp(current.theta_deg,
                                 std::max(line.theta_deg - 1.0, -theta_window_deg),
                                 std::min(line.theta_deg + 1.0, theta_window_deg));
  return current;
}

BoundaryExtraction finish_extraction(BoundaryMethod method, std::vector<Point2> candidates,
                                     const LineHypothesis &line, const HoughParams &hough) {
  BoundaryExtraction be;
  be.method = method;
  be.line = refine_line(candidates, line, hough.rho_step_px, hough.theta_window_deg);
  be.delta_yaw_deg = be.line.theta_deg;
  be.candidates = std::move(candidates);
  return be;
}

}  // namespace

BoundaryExtraction extract_boundary_flank(const RasterImage &gray, const BoundaryParams &params) {
  if (!gray.is_gray())
    throw_error(ErrorCode::InvalidArgument, "boundary extraction expects a gray image");
  const int cols = gray.width, rows = gray.height;
  const int c = cols / 2;
  const int fw = params.flank_width_px;
  if (c - fw < 0 || c + fw >= cols)
    throw_error(ErrorCode::InvalidArgument, "image too narrow for the flank regions");

  const RowBand band = resolve_band(gray, params);
  const int fh = params.flank_height_px;
  const int fr0 = std::max(band.begin, rows / 2 - fh / 2);
  const int fr1 = std::min(band.end, rows / 2 + fh / 2);
  if (fr1 <= fr0)
    throw_error(ErrorCode::InvalidArgument, "flank rows do not intersect the candidate band");

  double sum_l = 0.0, sum_r = 0.0;
  for (int v = fr0; v < fr1; ++v) {
    for (int k = 1; k <= fw; ++k) {
      sum_l += gray.at(c - k, v);
      sum_r += gray.at(c + k, v);
    }
  }
  const double n = static_cast<double>(fr1 - fr0) * fw;
  const double mean_l = sum_l / n, mean_r = sum_r / n;
  if (std::abs(mean_l - mean_r) < params.contrast_min)
    throw_error(ErrorCode::LowContrast, "flank regions do not separate pallet and background");
  const double threshold = (mean_l + mean_r) / 2.0;

  // Raster scan each row from the pallet side (+u) toward the background and
  // keep the first crossing of the threshold, interpolated to sub-pixel.
  std::vector<Point2> candidates;
  const int scan_start = std::min(c + fw, cols - 1);
  for (int v = band.begin; v < band.end; ++v) {
    const double s0 = gray.at(scan_start, v) - threshold;
    if (s0 == 0.0) continue;
    for (int u = scan_start - 1; u >= 0; --u) {
      const double s = gray.at(u, v) - threshold;
      if (s == 0.0 || (s < 0.0) != (s0 < 0.0)) {
        const double prev = gray.at(u + 1, v);
        const double cur = gray.at(u, v);
        const double frac = (prev == cur) ? 0.0 : (threshold - cur) / (prev - cur);
        candidates.push_back({u + frac, static_cast<double>(v)});
        break;
      }
    }
  }
  if (candidates.size() < 2)
    throw_error(ErrorCode::NoLine, "no boundary candidates found by flank scan");

  const auto lines = hough_lines(candidates, params.hough);
  return finish_extraction(BoundaryMethod::FlankThreshold, std::move(candidates), lines.front(),
                           params.hough.rho_step_px);
}

BoundaryExtraction extract_boundary_edge(const RasterImage &gray, const BoundaryParams &params) {
  const RasterImage edges = sobel_magnitude(gray);
  const RowBand band = resolve_band(gray, params);

  std::vector<Point2> candidates;
  for (int v = std::max(1, band.begin); v < std::min(gray.height - 1, band.end); ++v)
    for (int u = 1; u < gray.width - 1; ++u)
      if (edges.at(u, v) >= params.tau_edge)
        candidates.push_back({static_cast<double>(u), static_cast<double>(v)});
  if (candidates.size() < 2)
    throw_error(ErrorCode::NoLine, "no edge candidates above tau_edge");

  const auto lines = hough_lines(candidates, params.hough);
  // "Closest to the center line": among hypotheses of comparable support,
  // prefer the smallest distance to the image center, then the smallest tilt.
  const int top_votes = lines.front().votes;
  LineHypothesis best = lines.front();
  double best_dist = center_distance(best, params.hough);
  for (const LineHypothesis &h : lines) {
    if (h.votes * 2 < top_votes) continue;
    const double d = center_distance(h, params.hough);
    if (d < best_dist - 1e-12 ||
        (std::abs(d - best_dist) <= 1e-12 && std::abs(h.theta_deg) < std::abs(best.theta_deg))) {
      best = h;
      best_dist = d;
    }
  }
  return finish_extraction(BoundaryMethod::EdgeHough, std::move(candidates), best,
                           params.hough.rho_step_px);
}

namespace {

struct HPlaneSetup {
  PlaneSpec plane;
  BoundaryParams boundary;
};

HPlaneSetup horizontal_setup(const PalletPose &pose, const PalletSpec &spec,
                             const LocalizeParams &params, PlaneHeight height) {
  HPlaneSetup s;
  const double along_mm = spec.width_mm + 2.0 * params.hplane_margin_mm;
  s.plane = make_horizontal_plane(pose, spec, height, params.hplane_width_mm, along_mm,
                                  params.hplane_res_mm, params.h_min_mm);
  const int rows = s.plane.rows();
  const int span = static_cast<int>(spec.width_mm / params.hplane_res_mm);
  s.boundary.hough = params.hough;
  s.boundary.hough.center_u = s.plane.cols() / 2.0;
  s.boundary.hough.center_v = rows / 2.0;
  s.boundary.contrast_min = params.contrast_min;
  s.boundary.flank_width_px = params.flank_width_px;
  s.boundary.flank_height_px = params.flank_height_px;
  s.boundary.tau_edge = params.tau_edge;
  s.boundary.row_begin = std::max(1, rows / 2 - static_cast<int>(0.45 * span));
  s.boundary.row_end = std::min(rows - 1, rows / 2 + static_cast<int>(0.45 * span));
  return s;
}

BoundaryExtraction run_extraction(const RasterImage &gray, const BoundaryParams &bp,
                                  BoundaryMethod method) {
  return method == BoundaryMethod::FlankThreshold ? extract_boundary_flank(gray, bp)
                                                  : extract_boundary_edge(gray, bp);
}

}  // namespace

YawEstimate estimate_yaw(const EquirectImage &eq, const PalletPose &pose, const PalletSpec &spec,
                         const LocalizeParams &params) {
  pose.validate();
  spec.validate();

  PlaneHeight height = select_plane_height(pose, spec, params);
  ProjectionOptions proj = params.projection;
  proj.threads = params.threads;

  HPlaneSetup setup = horizontal_setup(pose, spec, params, height);
  RasterImage gray = extract_channel(project_plane(eq, setup.plane, proj), params.channel);

  BoundaryExtraction be;
  try {
    be = run_extraction(gray, setup.boundary, params.boundary_method);
  } catch (const Error &e) {
    const bool recoverable =
        e.code() == ErrorCode::LowContrast || e.code() == ErrorCode::NoLine;
    if (!recoverable || !params.hole_top_fallback) throw;
    const PlaneHeight fallback = select_plane_height(pose, spec, params, /*low_contrast_flag=*/true);
    if (fallback == height) throw;
    height = fallback;
    setup = horizontal_setup(pose, spec, params, height);
    gray = extract_channel(project_plane(eq, setup.plane, proj), params.channel);
    be = run_extraction(gray, setup.boundary, params.boundary_method);
  }

  YawEstimate est;
  est.pose = pose;
  est.pose.yaw_deg += be.delta_yaw_deg;
  est.pose.validate();
  est.boundary = be;
  est.height_used = height;
  est.plane = setup.plane;
  return est;
}

namespace {

struct SweepSample {
  double score = -1.0;
  double du = 0.0, dv = 0.0;
};

// Mean raw edge magnitude at the template points (no saturation). Smooth in
// the offset, so it localizes the alignment peak where the saturated match
// score is flat.
double raw_edge_mean(const RasterImage &edges, const EdgeTemplate &tmpl, Point2 offset) {
  const double w = edges.width - 1, h = edges.height - 1;
  double sum = 0.0;
  for (const Point2 &p : tmpl.points) {
    const double x = p.u + offset.u, y = p.v + offset.v;
    if (x < 0.0 || x > w || y < 0.0 || y > h) continue;
    sum += sample_bilinear(edges, x, y);
  }
  return tmpl.points.empty() ? 0.0 : sum / tmpl.points.size();
}

double parabolic_shift(double left, double mid, double right) {
  const double denom = left - 2.0 * mid + right;
  if (!(denom < -1e-12)) return 0.0;  // not a concave peak
  return std::clamp(0.5 * (left - right) / denom, -0.75, 0.75);
}

struct InPlaneSearch {
  double seed_du = 0.0;  // pixels at the plane's resolution
  double seed_dv = 0.0;
  int radius = 30;
  int stride = 3;
};

// Projects the face plane at one displacement and scores the template around
// the image center. The in-plane search runs a strided scan, a stride-1
// refinement around the scan winner, and a final sub-pixel alignment on the
// raw edge mean. The sub-pixel step keeps the per-offset score free of
// pixel-phase ripple, which would otherwise wander the depth argmax across
// the saturated plateau of the score.
SweepSample score_offset(const EquirectImage &eq, const PalletPose &pose, const PalletSpec &spec,
                         const EdgeTemplate &tmpl, const LocalizeParams &params, double offset_mm,
                         double res_mm, const InPlaneSearch &search, const SweepObserver &observer) {
  const double width_mm = spec.width_mm + 2.0 * params.face_plane_margin_mm;
  const double height_mm = spec.height_mm + 2.0 * params.face_plane_margin_mm;
  const PlaneSpec plane = make_face_plane(pose, offset_mm, width_mm, height_mm, res_mm);

  ProjectionOptions proj = params.projection;
  proj.threads = 1;  // the sweep parallelizes over offsets
  const RasterImage projected = project_plane(eq, plane, proj);
  if (observer) observer(offset_mm, projected);
  const RasterImage edges = sobel_magnitude(extract_channel(projected, params.channel));

  const double cu = plane.cols() / 2.0 + search.seed_du;
  const double cv = plane.rows() / 2.0 + search.seed_dv;
  SweepSample best;
  for (int dv = -search.radius; dv <= search.radius; dv += search.stride) {
    for (int du = -search.radius; du <= search.radius; du += search.stride) {
      const double s = match_score(edges, tmpl, {cu + du, cv + dv}, params.tau_edge);
      if (s > best.score) best = {s, static_cast<double>(du), static_cast<double>(dv)};
    }
  }
  const SweepSample seed = best;
  const int reach = search.stride;
  for (int dv = static_cast<int>(seed.dv) - reach; dv <= static_cast<int>(seed.dv) + reach; ++dv) {
    for (int du = static_cast<int>(seed.du) - reach; du <= static_cast<int>(seed.du) + reach; ++du) {
      const double s = match_score(edges, tmpl, {cu + du, cv + dv}, params.tau_edge);
      if (s > best.score) best = {s, static_cast<double>(du), static_cast<double>(dv)};
    }
  }

  double raw[3][3];
  for (int j = 0; j < 3; ++j)
    for (int i = 0; i < 3; ++i)
      raw[j][i] = raw_edge_mean(edges, tmpl, {cu + best.du + (i - 1), cv + best.dv + (j - 1)});
  const double du_star = best.du + parabolic_shift(raw[1][0], raw[1][1], raw[1][2]);
  const double dv_star = best.dv + parabolic_shift(raw[0][1], raw[1][1], raw[2][1]);
  // The refined alignment is used unconditionally: evaluating every offset at
  // its own sub-pixel optimum is what makes the scores comparable across
  // offsets.
  best = {match_score(edges, tmpl, {cu + du_star, cv + dv_star}, params.tau_edge),
          search.seed_du + du_star, search.seed_dv + dv_star};
  return best;
}

std::vector<double> sweep_offsets(double lo, double hi, double step) {
  std::vector<double> offsets;
  for (double o = lo; o <= hi + 1e-9; o += step) offsets.push_back(o);
  return offsets;
}

}  // namespace

std::pair<PalletPose, DepthProfile> search_depth(const EquirectImage &eq, const PalletPose &pose,
                                                 const PalletSpec &spec, const LocalizeParams &params,
                                                 const SweepObserver &observer) {
  pose.validate();
  spec.validate();
  if (!(params.range_lo_mm <= 0.0 && params.range_hi_mm >= 0.0))
    throw_error(ErrorCode::InvalidArgument, "depth sweep range must contain 0");
  if (!(params.coarse_step_mm > 0.0) || !(params.fine_step_mm > 0.0))
    throw_error(ErrorCode::InvalidArgument, "depth sweep steps must be positive");

  // Locate pass: coarse resolution, wide in-plane search, coarse offsets.
  // Finds roughly where the pallet sits in depth and in the plane.
  const EdgeTemplate coarse_tmpl = build_edge_template(spec, params.face_plane_res_mm);
  const std::vector<double> coarse = sweep_offsets(params.range_lo_mm, params.range_hi_mm,
                                                   params.coarse_step_mm);
  std::vector<SweepSample> locate(coarse.size());
  InPlaneSearch wide;
  wide.radius = params.search_px;
  wide.stride = 3;
  parallel_for(0, static_cast<int>(coarse.size()), effective_threads(params.threads),
               [&](int i0, int i1) {
                 for (int i = i0; i < i1; ++i)
                   locate[i] = score_offset(eq, pose, spec, coarse_tmpl, params, coarse[i],
                                            params.face_plane_res_mm, wide, nullptr);
               });
  size_t ci = 0;
  for (size_t i = 1; i < coarse.size(); ++i)
    if (locate[i].score > locate[ci].score) ci = i;

  // Profile pass: fine resolution everywhere, dense offsets around the
  // locate argmax, in-plane search seeded from the locate result. The seed
  // follows the known drift of the grid anchor along the view ray, so a
  // small search radius suffices at any offset.
  const double res_f = params.face_plane_fine_res_mm;
  const EdgeTemplate fine_tmpl = build_edge_template(spec, res_f);
  std::vector<double> offsets = coarse;
  {
    const double lo = std::max(params.range_lo_mm, coarse[ci] - 1.5 * params.coarse_step_mm);
    const double hi = std::min(params.range_hi_mm, coarse[ci] + 1.5 * params.coarse_step_mm);
    for (const double o : sweep_offsets(lo, hi, params.fine_step_mm)) offsets.push_back(o);
    std::sort(offsets.begin(), offsets.end());
    offsets.erase(std::unique(offsets.begin(), offsets.end(),
                              [](double a, double b) { return std::abs(a - b) < 1e-9; }),
                  offsets.end());
  }

  const Vec3 ray = pose.position.normalized();
  const Vec3 away = pose.away_dir();
  const double along = ray.dot(away);
  const Vec3 edge = pose.edge_dir();
  const double drift_u = -ray.dot(edge) / along;        // mm of lateral drift per mm of offset
  const double drift_v = -ray.dot({0.0, 0.0, -1.0}) / along;
  const double seed_u_mm = locate[ci].du * params.face_plane_res_mm;
  const double seed_v_mm = locate[ci].dv * params.face_plane_res_mm;

  std::vector<SweepSample> samples(offsets.size());
  parallel_for(0, static_cast<int>(offsets.size()), effective_threads(params.threads),
               [&](int i0, int i1) {
                 for (int i = i0; i < i1; ++i) {
                   InPlaneSearch seeded;
                   const double d = offsets[i] - coarse[ci];
                   seeded.seed_du = std::round((seed_u_mm + drift_u * d) / res_f);
                   seeded.seed_dv = std::round((seed_v_mm + drift_v * d) / res_f);
                   seeded.radius = 8;
                   seeded.stride = 2;
                   samples[i] = score_offset(eq, pose, spec, fine_tmpl, params, offsets[i], res_f,
                                             seeded, observer);
                 }
               });

  DepthProfile profile;
  profile.offsets_mm = offsets;
  profile.scores.resize(samples.size());
  size_t best_i = 0;
  for (size_t i = 0; i < samples.size(); ++i) {
    profile.scores[i] = samples[i].score;
    if (samples[i].score > samples[best_i].score) best_i = i;
  }
  profile.best_offset_mm = offsets[best_i];
  profile.best_score = samples[best_i].score;

  if (profile.best_score < params.theta_detect)
    throw_error(ErrorCode::NoPalletAtDepth, "no depth offset scored above theta_detect");

  const double width_mm = spec.width_mm + 2.0 * params.face_plane_margin_mm;
  const double height_mm = spec.height_mm + 2.0 * params.face_plane_margin_mm;
  const PlaneSpec best_plane =
      make_face_plane(pose, profile.best_offset_mm, width_mm, height_mm, res_f);
  PalletPose out = pose;
  out.position = plane_pixel_to_world(best_plane, best_plane.cols() / 2.0 + samples[best_i].du,
                                      best_plane.rows() / 2.0 + samples[best_i].dv);
  return {out, profile};
}

namespace {

[[noreturn]] void rethrow_tagged(const Error &e, const char *stage) {
  throw Error(e.code(), std::string(stage) + ": " + e.what());
}

}  // namespace

LocalizeResult localize_pallet(const EquirectImage &eq, const PalletPose &initial,
                               const PalletSpec &spec, const LocalizeParams &params,
                               const LocalizeDebug *debug) {
  using clock = std::chrono::steady_clock;
  LocalizeResult result;

  const auto t0 = clock::now();
  YawEstimate yaw;
  try {
    yaw = estimate_yaw(eq, initial, spec, params);
  } catch (const Error &e) {
    rethrow_tagged(e, "yaw");
  }
  const auto t1 = clock::now();

  if (debug && debug->image) {
    ProjectionOptions proj = params.projection;
    proj.threads = params.threads;
    const RasterImage hplane = project_plane(eq, yaw.plane, proj);
    debug->image("horizontal_plane.ppm", hplane);
    RasterImage overlay = hplane;
    const int cc = overlay.width / 2;
    for (int v = 0; v < overlay.height; ++v) overlay.set_rgb(cc, v, {0.0, 1.0, 0.0});
    for (const Point2 &p : yaw.boundary.candidates) {
      const int u = static_cast<int>(std::lround(p.u)), v = static_cast<int>(std::lround(p.v));
      if (u >= 0 && u < overlay.width && v >= 0 && v < overlay.height)
        overlay.set_rgb(u, v, {1.0, 0.0, 0.0});
    }
    debug->image("boundary_candidates.ppm", overlay);
  }

  SweepObserver observer;
  if (debug && debug->image) {
    observer = [debug](double offset_mm, const RasterImage &img) {
      char name[64];
      std::snprintf(name, sizeof(name), "sweep_%+07.1fmm.ppm", offset_mm);
      debug->image(name, img);
    };
  }

  const auto t2 = clock::now();
  std::pair<PalletPose, DepthProfile> depth;
  try {
    depth = search_depth(eq, yaw.pose, spec, params, observer);
  } catch (const Error &e) {
    rethrow_tagged(e, "position");
  }
  const auto t3 = clock::now();

  if (debug && debug->text) {
    std::ostringstream csv;
    csv << "offset_mm,score\n";
    for (size_t i = 0; i < depth.second.offsets_mm.size(); ++i)
      csv << depth.second.offsets_mm[i] << "," << depth.second.scores[i] << "\n";
    debug->text("depth_profile.csv", csv.str());
  }

  result.pose = depth.first;
  result.boundary = yaw.boundary;
  result.height_used = yaw.height_used;
  result.profile = depth.second;
  result.score = depth.second.best_score;
  result.yaw_ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
  result.position_ms = std::chrono::duration<double, std::milli>(t3 - t2).count();
  return result;
}

}  // namespace palletproj
