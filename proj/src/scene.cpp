#include "palletproj/scene.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "palletproj/parallel.hpp"

namespace palletproj {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kStripeBias = 1e-6;  // paint wins ties against its surface
constexpr double kRayMin = 1e-9;

struct Hit {
  double t = kInf;
  Vec3 color;
};

void hit_floor(const SceneModel &scene, const Vec3 &d, Hit &best) {
  if (!scene.has_floor || d.z == 0.0) return;
  const double t = scene.floor_z_mm / d.z;
  if (t > kRayMin && t < best.t) best = {t, scene.floor_color};
}

void hit_box(const SceneBox &box, const Vec3 &d, Hit &best) {
  double t0 = kRayMin, t1 = best.t;
  const double o[3] = {0.0, 0.0, 0.0};
  const double dir[3] = {d.x, d.y, d.z};
  const double lo[3] = {box.min.x, box.min.y, box.min.z};
  const double hi[3] = {box.max.x, box.max.y, box.max.z};
  for (int a = 0; a < 3; ++a) {
    if (dir[a] == 0.0) {
      if (o[a] < lo[a] || o[a] > hi[a]) return;
      continue;
    }
    double ta = (lo[a] - o[a]) / dir[a];
    double tb = (hi[a] - o[a]) / dir[a];
    if (ta > tb) std::swap(ta, tb);
    t0 = std::max(t0, ta);
    t1 = std::min(t1, tb);
    if (t0 > t1) return;
  }
  if (t0 < best.t) best = {t0, box.color};
}

void hit_pallet(const ScenePallet &p, const Vec3 &d, Hit &best) {
  // Local frame: x' into the pallet (away from camera), y' along the face,
  // z' up, origin at the front-face center.
  const Vec3 ax = p.pose.away_dir();
  const Vec3 ay = p.pose.edge_dir();
  const Vec3 az{0.0, 0.0, 1.0};
  const Vec3 rel = -p.pose.position;  // camera position in face coordinates
  const Vec3 o{rel.dot(ax), rel.dot(ay), rel.dot(az)};
  const Vec3 dir{d.dot(ax), d.dot(ay), d.dot(az)};

  const double lo[3] = {0.0, -p.spec.width_mm / 2.0, -p.spec.height_mm / 2.0};
  const double hi[3] = {p.body_depth_mm, p.spec.width_mm / 2.0, p.spec.height_mm / 2.0};
  const double oc[3] = {o.x, o.y, o.z};
  const double dc[3] = {dir.x, dir.y, dir.z};

  double t0 = kRayMin, t1 = best.t;
  int enter_axis = -1;
  for (int a = 0; a < 3; ++a) {
    if (dc[a] == 0.0) {
      if (oc[a] < lo[a] || oc[a] > hi[a]) return;
      continue;
    }
    double ta = (lo[a] - oc[a]) / dc[a];
    double tb = (hi[a] - oc[a]) / dc[a];
    if (ta > tb) std::swap(ta, tb);
    if (ta > t0) {
      t0 = ta;
      enter_axis = a;
    }
    t1 = std::min(t1, tb);
    if (t0 > t1) return;
  }
  if (t0 >= best.t) return;

  Vec3 color = p.face_color;
  // Fork holes only paint the front face (entry through x' = 0).
  if (enter_axis == 0 && oc[0] < 0.0) {
    const double y = oc[1] + t0 * dc[1];
    const double z = oc[2] + t0 * dc[2];
    const double hole_cy = p.spec.hole_offset_mm / 2.0;
    const double hole_z0 = -p.spec.height_mm / 2.0 + p.spec.hole_bottom_mm;
    const double hole_z1 = hole_z0 + p.spec.hole_height_mm;
    if (z >= hole_z0 && z <= hole_z1 &&
        (std::abs(y - hole_cy) <= p.spec.hole_width_mm / 2.0 ||
         std::abs(y + hole_cy) <= p.spec.hole_width_mm / 2.0))
      color = p.hole_color;
  }
  best = {t0, color};
}

void hit_stripe(const SceneStripe &s, const Vec3 &d, Hit &best) {
  const Vec3 n = s.edge_u.cross(s.edge_v);
  const double denom = d.dot(n);
  if (denom == 0.0) return;
  const double t = s.origin.dot(n) / denom;
  if (t <= kRayMin || t - kStripeBias >= best.t) return;
  const Vec3 q = d * t - s.origin;
  const double uu = s.edge_u.dot(s.edge_u), vv = s.edge_v.dot(s.edge_v);
  const double uv = s.edge_u.dot(s.edge_v);
  const double qu = q.dot(s.edge_u), qv = q.dot(s.edge_v);
  const double det = uu * vv - uv * uv;
  if (det == 0.0) return;
  const double a = (qu * vv - qv * uv) / det;
  const double b = (qv * uu - qu * uv) / det;
  if (a < 0.0 || a > 1.0 || b < 0.0 || b > 1.0) return;
  best = {t - kStripeBias, s.color};
}

// Counter-based hash noise: thread-count independent and reproducible.
double pixel_noise(unsigned long seed, unsigned long index) {
  unsigned long x = seed * 0x9E3779B97F4A7C15ull + index + 1;
  x ^= x >> 30;
  x *= 0xBF58476D1CE4E5B9ull;
  x ^= x >> 27;
  x *= 0x94D049BB133111EBull;
  x ^= x >> 31;
  return static_cast<double>(x >> 11) * (1.0 / 9007199254740992.0) * 2.0 - 1.0;  // [-1, 1)
}

}  // namespace

Vec3 trace_ray(const SceneModel &scene, const Vec3 &dir) {
  Hit best;
  best.color = scene.background;
  hit_floor(scene, dir, best);
  for (const SceneBox &b : scene.boxes) hit_box(b, dir, best);
  for (const ScenePallet &p : scene.pallets) hit_pallet(p, dir, best);
  for (const SceneStripe &s : scene.stripes) hit_stripe(s, dir, best);
  return best.color;
}

EquirectImage render_equirect(const SceneModel &scene, int width, int height, int threads) {
  if (width != 2 * height)
    throw_error(ErrorCode::InvalidArgument, "equirect render needs width = 2 * height");
  if (height < 256)
    throw_error(ErrorCode::InvalidArgument, "equirect render needs height >= 256");
  const int spp = std::max(1, scene.samples_per_pixel);

  EquirectImage eq{RasterImage::color(width, height)};
  parallel_for(0, height, effective_threads(threads), [&](int y0, int y1) {
    for (int y = y0; y < y1; ++y) {
      for (int x = 0; x < width; ++x) {
        Vec3 acc;
        for (int sy = 0; sy < spp; ++sy) {
          for (int sx = 0; sx < spp; ++sx) {
            const double du = (sx + 0.5) / spp - 0.5;
            const double dv = (sy + 0.5) / spp - 0.5;
            acc += trace_ray(scene, pixel_to_dir(eq, x + du, y + dv));
          }
        }
        Vec3 rgb = acc / static_cast<double>(spp * spp);
        if (scene.noise_amplitude > 0.0) {
          const unsigned long base = 3ull * (static_cast<unsigned long>(y) * width + x);
          rgb.x += scene.noise_amplitude * pixel_noise(scene.noise_seed, base);
          rgb.y += scene.noise_amplitude * pixel_noise(scene.noise_seed, base + 1);
          rgb.z += scene.noise_amplitude * pixel_noise(scene.noise_seed, base + 2);
        }
        eq.image.set_rgb(x, y, {std::clamp(rgb.x, 0.0, 1.0), std::clamp(rgb.y, 0.0, 1.0),
                                std::clamp(rgb.z, 0.0, 1.0)});
      }
    }
  });
  return eq;
}

GroundTruthEntry ground_truth(const SceneModel &scene, int pallet_index) {
  if (pallet_index < 0 || pallet_index >= static_cast<int>(scene.pallets.size()))
    throw_error(ErrorCode::InvalidArgument, "pallet index out of range");
  const ScenePallet &p = scene.pallets[pallet_index];
  GroundTruthEntry gt;
  gt.pose = p.pose;
  gt.below_camera = p.pose.position.z < 0.0;
  gt.suggested_height = gt.below_camera ? PlaneHeight::Bottom : PlaneHeight::Top;
  return gt;
}

std::vector<SceneModel> trajectory_scenes(const SceneModel &base, std::span<const double> offsets_mm) {
  std::vector<SceneModel> scenes;
  scenes.reserve(offsets_mm.size());
  for (const double off : offsets_mm) {
    if (!std::isfinite(off))
      throw_error(ErrorCode::InvalidArgument, "trajectory offsets must be finite");
    SceneModel s = base;
    const Vec3 shift{-off, 0.0, 0.0};
    for (SceneBox &b : s.boxes) {
      b.min += shift;
      b.max += shift;
    }
    for (ScenePallet &p : s.pallets) p.pose.position += shift;
    for (SceneStripe &st : s.stripes) st.origin += shift;
    scenes.push_back(std::move(s));
  }
  return scenes;
}

}  // namespace palletproj
