#include "palletproj/pallet_model.hpp"

#include <algorithm>
#include <cmath>
#include <tuple>

#include "palletproj/parallel.hpp"

namespace palletproj {

void PalletSpec::validate() const {
  const bool positive = width_mm > 0 && height_mm > 0 && hole_width_mm > 0 &&
                        hole_height_mm > 0 && hole_offset_mm > 0 && hole_bottom_mm > 0 &&
                        corner_radius_mm >= 0;
  if (!positive) throw_error(ErrorCode::InvalidArgument, "pallet dimensions must be positive");
  if (hole_offset_mm + hole_width_mm >= width_mm)
    throw_error(ErrorCode::InvalidArgument, "fork holes do not fit inside the face width");
  if (hole_offset_mm - hole_width_mm <= 0)
    throw_error(ErrorCode::InvalidArgument, "fork holes overlap at the centerline");
  if (hole_bottom_mm + hole_height_mm >= height_mm)
    throw_error(ErrorCode::InvalidArgument, "fork holes do not fit inside the face height");
  if (corner_radius_mm >= std::min(width_mm, height_mm) / 2.0)
    throw_error(ErrorCode::InvalidArgument, "corner radius too large for the face");
}

namespace {

// Appends a closed rectangle contour with corners (+-hw, +-hh) around
// `center`, sampled at `spacing` px. Each side is sampled end-inclusive with
// an integral number of intervals, which keeps the point set mirror-symmetric;
// duplicated corners are dropped afterwards.
void append_rect(std::vector<Point2> &pts, Point2 center, double hw, double hh, double spacing) {
  const Point2 corners[4] = {{center.u - hw, center.v - hh},
                             {center.u + hw, center.v - hh},
                             {center.u + hw, center.v + hh},
                             {center.u - hw, center.v + hh}};
  for (int side = 0; side < 4; ++side) {
    const Point2 a = corners[side], b = corners[(side + 1) % 4];
    const double len = std::hypot(b.u - a.u, b.v - a.v);
    const int steps = std::max(1, static_cast<int>(std::lround(len / spacing)));
    for (int i = 0; i <= steps; ++i) {
      const double t = static_cast<double>(i) / steps;
      pts.push_back({a.u + t * (b.u - a.u), a.v + t * (b.v - a.v)});
    }
  }
}

void dedupe(std::vector<Point2> &pts) {
  auto key = [](const Point2 &p) { return std::make_pair(p.u, p.v); };
  std::sort(pts.begin(), pts.end(),
            [&key](const Point2 &a, const Point2 &b) { return key(a) < key(b); });
  pts.erase(std::unique(pts.begin(), pts.end(),
                        [&key](const Point2 &a, const Point2 &b) { return key(a) == key(b); }),
            pts.end());
}

}  // namespace

EdgeTemplate build_edge_template(const PalletSpec &spec, double res_mm) {
  spec.validate();
  if (!(res_mm > 0.0))
    throw_error(ErrorCode::InvalidArgument, "template resolution must be positive");
  if (res_mm > std::min(spec.height_mm, spec.width_mm) / 10.0)
    throw_error(ErrorCode::InvalidArgument, "template resolution too coarse for the face");

  EdgeTemplate tmpl;
  tmpl.res_mm = res_mm;
  const double hw = spec.width_mm / 2.0 / res_mm;
  const double hh = spec.height_mm / 2.0 / res_mm;

  std::vector<Point2> outer;
  append_rect(outer, {0.0, 0.0}, hw, hh, 1.0);
  const double exclusion = spec.corner_radius_mm / res_mm;
  if (exclusion > 0.0) {
    const Point2 corners[4] = {{-hw, -hh}, {hw, -hh}, {hw, hh}, {-hw, hh}};
    std::erase_if(outer, [&](const Point2 &p) {
      for (const Point2 &c : corners)
        if (std::hypot(p.u - c.u, p.v - c.v) < exclusion) return true;
      return false;
    });
  }
  tmpl.points = std::move(outer);

  const double hole_hw = spec.hole_width_mm / 2.0 / res_mm;
  const double hole_hh = spec.hole_height_mm / 2.0 / res_mm;
  // Hole center height: bottom of face + hole_bottom + half the hole.
  const double hole_cv = hh - (spec.hole_bottom_mm + spec.hole_height_mm / 2.0) / res_mm;
  const double hole_cu = spec.hole_offset_mm / 2.0 / res_mm;
  append_rect(tmpl.points, {-hole_cu, hole_cv}, hole_hw, hole_hh, 1.0);
  append_rect(tmpl.points, {+hole_cu, hole_cv}, hole_hw, hole_hh, 1.0);

  dedupe(tmpl.points);
  if (tmpl.points.empty())
    throw_error(ErrorCode::InvalidArgument, "edge template came out empty");
  return tmpl;
}

double match_score(const RasterImage &edges, const EdgeTemplate &tmpl, Point2 offset,
                   double tau_edge) {
  if (tmpl.points.empty()) return 0.0;
  const double w = edges.width - 1, h = edges.height - 1;
  double sum = 0.0;
  for (const Point2 &p : tmpl.points) {
    const double x = p.u + offset.u, y = p.v + offset.v;
    if (x < 0.0 || x > w || y < 0.0 || y > h) continue;  // outside: contributes 0
    const double e = sample_bilinear(edges, x, y);
    sum += std::min(1.0, e / tau_edge);
  }
  return sum / tmpl.points.size();
}

namespace {

struct Bounds {
  double min_u = 0, max_u = 0, min_v = 0, max_v = 0;
};

Bounds template_bounds(const EdgeTemplate &tmpl) {
  Bounds b{1e300, -1e300, 1e300, -1e300};
  for (const Point2 &p : tmpl.points) {
    b.min_u = std::min(b.min_u, p.u);
    b.max_u = std::max(b.max_u, p.u);
    b.min_v = std::min(b.min_v, p.v);
    b.max_v = std::max(b.max_v, p.v);
  }
  return b;
}

}  // namespace

std::vector<TemplateMatch> template_search(const RasterImage &edges, const EdgeTemplate &tmpl,
                                           const TemplateSearchParams &params) {
  const Bounds bb = template_bounds(tmpl);
  const double bw = bb.max_u - bb.min_u, bh = bb.max_v - bb.min_v;
  if (bw >= edges.width || bh >= edges.height)
    throw_error(ErrorCode::InvalidArgument, "edge image smaller than the template");

  // Integer-aligned offset grid: keeps detections on whole pixels, so a
  // plane re-centered at a detection resamples the same ray grid.
  const int u_lo = static_cast<int>(std::ceil(-bb.min_u));
  const int u_hi = static_cast<int>(std::floor(edges.width - 1 - bb.max_u));
  const int v_lo = static_cast<int>(std::ceil(-bb.min_v));
  const int v_hi = static_cast<int>(std::floor(edges.height - 1 - bb.max_v));
  const int stride = std::max(1, static_cast<int>(std::lround(params.stride_px)));
  const int nu = (u_hi - u_lo) / stride + 1;
  const int nv = (v_hi - v_lo) / stride + 1;

  std::vector<double> grid(static_cast<size_t>(nu) * nv, 0.0);
  parallel_for(0, nv, effective_threads(params.threads), [&](int j0, int j1) {
    for (int j = j0; j < j1; ++j) {
      for (int i = 0; i < nu; ++i) {
        const Point2 off{static_cast<double>(u_lo + i * stride),
                         static_cast<double>(v_lo + j * stride)};
        grid[static_cast<size_t>(j) * nu + i] = match_score(edges, tmpl, off, params.tau_edge);
      }
    }
  });

  // Grid-local maxima above a slightly relaxed bar are refined at stride 1;
  // the final bar is theta_detect.
  struct Seed {
    int i, j;
    double score;
  };
  std::vector<Seed> seeds;
  // Stride-grid scores dip when the grid straddles the peak, so seed well
  // below the final bar and let the refinement climb back up.
  const double pre_bar = params.theta_detect * 0.5;
  for (int j = 0; j < nv; ++j) {
    for (int i = 0; i < nu; ++i) {
      const double s = grid[static_cast<size_t>(j) * nu + i];
      if (s < pre_bar) continue;
      bool is_max = true;
      for (int dj = -1; dj <= 1 && is_max; ++dj) {
        for (int di = -1; di <= 1; ++di) {
          if (di == 0 && dj == 0) continue;
          const int ii = i + di, jj = j + dj;
          if (ii < 0 || jj < 0 || ii >= nu || jj >= nv) continue;
          if (grid[static_cast<size_t>(jj) * nu + ii] > s) {
            is_max = false;
            break;
          }
        }
      }
      if (is_max) seeds.push_back({i, j, s});
    }
  }
  std::sort(seeds.begin(), seeds.end(), [](const Seed &a, const Seed &b) {
    return std::tie(b.score, a.j, a.i) < std::tie(a.score, b.j, b.i);
  });

  auto clamp_offset = [&](Point2 p) {
    return Point2{std::clamp(p.u, static_cast<double>(u_lo), static_cast<double>(u_hi)),
                  std::clamp(p.v, static_cast<double>(v_lo), static_cast<double>(v_hi))};
  };

  std::vector<TemplateMatch> out;
  const double sep_u = bw, sep_v = bh;  // overlap = closer than the bbox extent
  for (const Seed &seed : seeds) {
    Point2 cur = clamp_offset({static_cast<double>(u_lo + seed.i * stride),
                               static_cast<double>(v_lo + seed.j * stride)});
    double cur_score = seed.score;
    // Greedy stride-1 ascent, bounded by twice the scan stride.
    const int max_climb = 2 * stride + 2;
    for (int step = 0; step < max_climb; ++step) {
      Point2 best = cur;
      double best_score = cur_score;
      for (int dj = -1; dj <= 1; ++dj) {
        for (int di = -1; di <= 1; ++di) {
          if (di == 0 && dj == 0) continue;
          const Point2 cand = clamp_offset({cur.u + di, cur.v + dj});
          const double s = match_score(edges, tmpl, cand, params.tau_edge);
          if (s > best_score) {
            best_score = s;
            best = cand;
          }
        }
      }
      if (best_score <= cur_score) break;
      cur = best;
      cur_score = best_score;
    }
    if (cur_score < params.theta_detect) continue;
    bool overlaps = false;
    for (const TemplateMatch &m : out) {
      if (std::abs(m.offset.u - cur.u) < sep_u && std::abs(m.offset.v - cur.v) < sep_v) {
        overlaps = true;
        break;
      }
    }
    if (!overlaps) out.push_back({cur, cur_score});
  }
  std::sort(out.begin(), out.end(), [](const TemplateMatch &a, const TemplateMatch &b) {
    return std::tie(b.score, a.offset.v, a.offset.u) < std::tie(a.score, b.offset.v, b.offset.u);
  });
  return out;
}

}  // namespace palletproj
