// Acceptance suite: runs every top-level criterion at its stated tolerance
// and prints one PASS/FAIL line per criterion. Returns nonzero if any fail.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "../hough_oracle.hpp"
#include "../testutil.hpp"
#include "palletproj/config.hpp"
#include "palletproj/image_io.hpp"
#include "palletproj/localize.hpp"

using namespace palletproj;
namespace fs = std::filesystem;
using clock_type = std::chrono::steady_clock;

namespace {

int g_failures = 0;

void report(const std::string &id, bool pass, const std::string &detail) {
  std::printf("%-4s %s  %s\n", id.c_str(), pass ? "PASS" : "FAIL", detail.c_str());
  std::fflush(stdout);
  if (!pass) ++g_failures;
}

double seconds_since(clock_type::time_point t0) {
  return std::chrono::duration<double>(clock_type::now() - t0).count();
}

struct GridOutcome {
  bool converged = false;
  double yaw_err = 1e9;
  double pos_err = 1e9;
};

GridOutcome run_grid_pose(double yaw_true, double recess, int render_height = 1920) {
  testutil::ShelfSceneSpec sspec;
  sspec.yaw_deg = yaw_true;
  sspec.recess = recess;
  sspec.pallet_y = -900.0;
  const SceneModel scene = testutil::make_shelf_scene(sspec);
  const EquirectImage eq = testutil::render_test_scene(scene, render_height);
  const PalletPose truth = scene.pallets[0].pose;
  const PalletPose init = testutil::shelf_plane_init(truth, sspec.shelf_x);

  GridOutcome out;
  try {
    const LocalizeResult res =
        localize_pallet(eq, init, sspec.pallet, testutil::test_localize_params());
    out.converged = true;
    out.yaw_err = std::abs(res.pose.yaw_deg - truth.yaw_deg);
    out.pos_err = (res.pose.position - truth.position).norm();
  } catch (const Error &) {
    out.converged = false;
  }
  return out;
}

// C1 + C2 + C3: perturbation grid, basin convergence, runtime.
void criteria_grid() {
  const double yaws[] = {-5.0, -2.5, 0.0, 2.5, 5.0};
  const double depths[] = {-100.0, 0.0, 150.0, 300.0, 500.0};

  const auto t0 = clock_type::now();
  double max_yaw_err = 0.0, max_pos_err = 0.0;
  int converged = 0;
  for (const double y : yaws) {
    for (const double d : depths) {
      const GridOutcome out = run_grid_pose(y, d);
      if (out.converged) {
        ++converged;
        max_yaw_err = std::max(max_yaw_err, out.yaw_err);
        max_pos_err = std::max(max_pos_err, out.pos_err);
      }
    }
  }
  const double elapsed = seconds_since(t0);

  {
    std::ostringstream ss;
    ss << "yaw error over 25-pose grid: max " << max_yaw_err << " deg (tol 1.0), grid took "
       << elapsed << " s (limit 300)";
    report("C1", converged == 25 && max_yaw_err <= 1.0 && elapsed < 300.0, ss.str());
  }
  {
    std::ostringstream ss;
    ss << "position error over the grid: max " << max_pos_err << " mm (tol 20)";
    report("C2", converged == 25 && max_pos_err <= 20.0, ss.str());
  }
  {
    // Just outside the documented basin: a +8 degree initial yaw error may
    // fail; its outcome is informational.
    const GridOutcome outside = run_grid_pose(8.0, 300.0);
    std::ostringstream ss;
    ss << "all 25 in-basin poses converged; +8 deg probe "
       << (outside.converged && outside.yaw_err <= 1.0 ? "also converged"
                                                       : "failed (boundary is real)");
    report("C3", converged == 25, ss.str());
  }
}

// C4: warehouse fixture with a deliberately shifted initial pose.
void criterion_fixture() {
  testutil::ShelfSceneSpec sspec;
  sspec.shelf_x = 1718.0;
  sspec.pallet_y = -1521.0;
  sspec.pallet_z = -760.0;
  sspec.recess = 2027.0 - 1718.0;
  const SceneModel scene = testutil::make_shelf_scene(sspec);
  const EquirectImage eq = testutil::render_test_scene(scene, 1024);

  PalletPose init;
  init.position = {1718.0, -1280.0, -642.0};
  init.yaw_deg = 5.0;

  bool pass = false;
  std::ostringstream ss;
  try {
    const LocalizeResult res =
        localize_pallet(eq, init, sspec.pallet, testutil::test_localize_params());
    const Vec3 truth{2027.0, -1521.0, -760.0};
    const double pos_err = (res.pose.position - truth).norm();
    const double yaw_err = std::abs(res.pose.yaw_deg - 0.0);
    pass = pos_err <= 20.0 && yaw_err <= 1.0;
    ss << "fixture (2027,-1521,-760) from (1718,-1280,-642)+5deg: pos err " << pos_err
       << " mm (tol 20), yaw err " << yaw_err << " deg (tol 1)";
  } catch (const Error &e) {
    ss << "fixture raised " << error_code_name(e.code());
  }
  report("C4", pass, ss.str());
}

// C5: stage runtimes at the paper-scale input, single-threaded; parallel mode
// must beat single-threaded when enough cores exist.
void criterion_runtime() {
  testutil::ShelfSceneSpec sspec;
  sspec.recess = 200.0;
  sspec.yaw_deg = 2.0;
  const SceneModel scene = testutil::make_shelf_scene(sspec);
  const EquirectImage eq = testutil::render_test_scene(scene, 1920);
  const PalletPose truth = scene.pallets[0].pose;
  const PalletPose init = testutil::shelf_plane_init(truth, sspec.shelf_x);

  LocalizeParams single = testutil::test_localize_params();
  single.threads = 1;
  double yaw_s = 1e9, pos_s = 1e9;
  bool ok = true;
  try {
    for (int rep = 0; rep < 3; ++rep) {
      const LocalizeResult res = localize_pallet(eq, init, sspec.pallet, single);
      yaw_s = std::min(yaw_s, res.yaw_ms / 1000.0);
      pos_s = std::min(pos_s, res.position_ms / 1000.0);
    }
  } catch (const Error &) {
    ok = false;
  }

  std::ostringstream ss;
  ss << "3840x1920 single-thread: yaw " << yaw_s << " s (tol 0.5), position " << pos_s
     << " s (tol 3.0)";
  bool pass = ok && yaw_s <= 0.5 && pos_s <= 3.0;

  const unsigned cores = std::thread::hardware_concurrency();
  if (cores >= 4) {
    LocalizeParams parallel = testutil::test_localize_params();
    parallel.threads = 0;
    double par_total = 1e9, single_total = 1e9;
    for (int rep = 0; rep < 3; ++rep) {
      const LocalizeResult rs = localize_pallet(eq, init, sspec.pallet, single);
      single_total = std::min(single_total, (rs.yaw_ms + rs.position_ms) / 1000.0);
      const LocalizeResult rp = localize_pallet(eq, init, sspec.pallet, parallel);
      par_total = std::min(par_total, (rp.yaw_ms + rp.position_ms) / 1000.0);
    }
    pass = pass && par_total < single_total;
    ss << "; parallel " << par_total << " s vs single " << single_total << " s on " << cores
       << " cores";
  } else {
    ss << "; parallel comparison skipped (" << cores << " cores < 4)";
  }
  report("C5", pass, ss.str());
}

// C6: 34-frame approach, 4.7 m down to 1.4 m.
void criterion_trajectory() {
  testutil::ShelfSceneSpec sspec;
  sspec.shelf_x = 4700.0;
  sspec.pallet_y = -700.0;
  sspec.recess = 150.0;
  sspec.yaw_deg = 1.5;
  const SceneModel base = testutil::make_shelf_scene(sspec);

  std::vector<double> offsets;
  for (int i = 0; i < 34; ++i) offsets.push_back(100.0 * i);  // 4.7 m down to 1.4 m
  const auto scenes = trajectory_scenes(base, offsets);

  std::vector<double> estimates;
  bool all_converged = true;
  for (const SceneModel &scene : scenes) {
    const EquirectImage eq = testutil::render_test_scene(scene, 1920);
    const PalletPose truth = scene.pallets[0].pose;
    const PalletPose init = testutil::shelf_plane_init(truth, truth.position.x - sspec.recess);
    try {
      const LocalizeResult res =
          localize_pallet(eq, init, sspec.pallet, testutil::test_localize_params());
      estimates.push_back(res.pose.yaw_deg);
    } catch (const Error &) {
      all_converged = false;
      break;
    }
  }

  double max_dev = 0.0, max_jump = 0.0;
  if (all_converged) {
    for (size_t i = 0; i < estimates.size(); ++i) {
      max_dev = std::max(max_dev, std::abs(estimates[i] - sspec.yaw_deg));
      if (i > 0) max_jump = std::max(max_jump, std::abs(estimates[i] - estimates[i - 1]));
    }
  }
  std::ostringstream ss;
  ss << "34-frame approach 4.7m->1.4m: max |yaw - truth| " << max_dev
     << " deg (tol 1), max frame-to-frame jump " << max_jump << " deg (tol 1)";
  report("C6", all_converged && max_dev <= 1.0 && max_jump <= 1.0, ss.str());
}

// C7: projection property suite.
void criterion_projection() {
  bool pass = true;
  std::ostringstream ss;

  // Round trips.
  {
    const EquirectImage eq{RasterImage::color(2048, 1024)};
    std::mt19937 rng(19);
    std::normal_distribution<double> g(0.0, 1.0);
    double worst = 0.0;
    for (int i = 0; i < 500; ++i) {
      Vec3 d{g(rng), g(rng), g(rng)};
      if (d.norm() < 1e-9) continue;
      d = d.normalized();
      if (std::abs(d.z) > 0.999) continue;
      const Point2 px = dir_to_pixel(eq, d);
      worst = std::max(worst, (pixel_to_dir(eq, px.u, px.v) - d).norm());
    }
    pass = pass && worst <= 1e-9;
    ss << "round-trip " << worst << " (tol 1e-9)";
  }

  // Straightness: stripe in the shelf plane.
  {
    SceneModel scene = testutil::make_shelf_scene({});
    scene.pallets.clear();
    const double tilt = deg_to_rad(8.0);
    scene.stripes.push_back({{2000.0, 150.0, 600.0},
                             Vec3{0.0, -std::sin(tilt), -std::cos(tilt)} * 1400.0,
                             {0.0, -80.0, 0.0},
                             {0.05, 0.05, 0.05}});
    const EquirectImage eq = testutil::render_test_scene(scene, 1024);
    const PlaneSpec plane =
        make_shelf_plane({2000.0, 0.0, 0.0}, {-1.0, 0.0, 0.0}, 2400.0, 1600.0, 5.0);
    const RasterImage gray = extract_channel(project_plane(eq, plane), Channel::Luminance);

    std::vector<Point2> pts;
    const double level = 0.25;  // between the stripe and the darkest surface
    for (int v = plane.rows() / 2 - 100; v < plane.rows() / 2 + 100; ++v) {
      for (int u = 1; u < gray.width; ++u) {
        const double prev = gray.at(u - 1, v), cur = gray.at(u, v);
        if (prev > level && cur <= level) {
          pts.push_back({u - 1 + (prev - level) / (prev - cur), static_cast<double>(v)});
          break;
        }
      }
    }
    double su = 0, sv = 0, suv = 0, svv = 0;
    for (const Point2 &p : pts) {
      su += p.u;
      sv += p.v;
      suv += p.u * p.v;
      svv += p.v * p.v;
    }
    const double n = static_cast<double>(pts.size());
    const double b = (suv - su * sv / n) / (svv - sv * sv / n);
    const double a = (su - b * sv) / n;
    double ssq = 0;
    for (const Point2 &p : pts) {
      const double r = p.u - (a + b * p.v);
      ssq += r * r;
    }
    const double rms = std::sqrt(ssq / n);
    pass = pass && pts.size() > 150 && rms < 0.5;
    ss << "; straightness RMS " << rms << " px (tol 0.5)";
  }

  // Full scale across camera positions.
  {
    const double offsets[][3] = {
        {0, 0, 0}, {-400, 300, 0}, {300, -500, 200}, {-250, 650, -150}, {150, 900, 250}};
    double worst = 0.0;
    for (const auto &off : offsets) {
      testutil::ShelfSceneSpec sspec;
      SceneModel scene = testutil::make_shelf_scene(sspec);
      // Thin slab: a deep body's same-color side face would abut the front
      // face in the image at oblique views and widen the measured run.
      scene.pallets[0].body_depth_mm = 2.0;
      const Vec3 shift{off[0], off[1], off[2]};
      for (ScenePallet &p : scene.pallets) p.pose.position += shift;
      for (SceneBox &b : scene.boxes) {
        b.min += shift;
        b.max += shift;
      }
      const EquirectImage eq = testutil::render_test_scene(scene, 1024);
      const PalletPose pose = scene.pallets[0].pose;
      const PlaneSpec plane = make_shelf_plane({pose.position.x, 0.0, 0.0}, {-1.0, 0.0, 0.0},
                                               3600.0, 2400.0, 5.0);
      const RasterImage gray = extract_channel(project_plane(eq, plane), Channel::B);
      // 60 mm above the face center: above the fork holes, below the top.
      const Point2 center_px = world_to_plane_pixel(plane, pose.position + Vec3{0.0, 0.0, 60.0});
      const int row = static_cast<int>(std::lround(center_px.v));
      const double level = 0.8;
      double left = -1.0, right = -1.0;
      for (int u = 1; u < gray.width; ++u) {
        const double prev = gray.at(u - 1, row), cur = gray.at(u, row);
        if (left < 0 && prev < level && cur >= level) left = u - 1 + (level - prev) / (cur - prev);
        if (prev >= level && cur < level) right = u - 1 + (prev - level) / (prev - cur);
      }
      worst = std::max(worst, std::abs((right - left) - sspec.pallet.width_mm / plane.res_mm));
    }
    pass = pass && worst <= 1.0;
    ss << "; full-scale deviation " << worst << " px (tol 1)";
  }

  // Horizontal-plane angle fidelity over camera offsets.
  {
    const double shifts[][3] = {
        {0, 0, 0}, {-300, 500, 100}, {300, -500, -150}, {600, 900, 200}, {-500, -700, 50}};
    double worst = 0.0;
    for (const auto &sh : shifts) {
      testutil::ShelfSceneSpec sspec;
      sspec.yaw_deg = 2.0;
      sspec.pallet_y = -800.0;
      sspec.pallet_z = -700.0;
      SceneModel scene = testutil::make_shelf_scene(sspec);
      const Vec3 shift{sh[0], sh[1], sh[2]};
      for (ScenePallet &p : scene.pallets) p.pose.position += shift;
      for (SceneBox &b : scene.boxes) {
        b.min += shift;
        b.max += shift;
      }
      const EquirectImage eq = testutil::render_test_scene(scene, 1536);
      PalletPose init = scene.pallets[0].pose;
      init.yaw_deg = 0.0;
      const YawEstimate est =
          estimate_yaw(eq, init, sspec.pallet, testutil::test_localize_params());
      worst = std::max(worst, std::abs(est.boundary.delta_yaw_deg - 2.0));
    }
    pass = pass && worst <= 0.3;
    ss << "; angle fidelity deviation " << worst << " deg (tol 0.3)";
  }

  report("C7", pass, ss.str());
}

// C8: accumulator vs brute-force oracle, 100 instances.
void criterion_hough() {
  std::mt19937 rng(47);
  std::uniform_real_distribution<double> coord(0.0, 300.0);
  std::uniform_real_distribution<double> tilt(-13.0, 13.0);
  int agreed = 0;
  const int instances = 100;
  for (int trial = 0; trial < instances; ++trial) {
    std::vector<Point2> pts;
    const int n_line = 5 + static_cast<int>(rng() % 120);
    const double theta = tilt(rng), u0 = coord(rng), v0 = coord(rng);
    const double m = std::tan(deg_to_rad(theta));
    for (int i = 0; i < n_line; ++i)
      pts.push_back({u0 - m * i, v0 + i});
    const int n_noise = static_cast<int>(rng() % 80);
    for (int i = 0; i < n_noise && pts.size() < 200; ++i) pts.push_back({coord(rng), coord(rng)});

    HoughParams params;
    params.center_u = coord(rng);
    params.center_v = coord(rng);
    const auto lines = hough_lines(pts, params);
    const LineHypothesis oracle = testutil::brute_force_top_line(pts, params);
    if (lines.front().theta_deg == oracle.theta_deg && lines.front().rho == oracle.rho &&
        lines.front().votes == oracle.votes)
      ++agreed;
  }
  std::ostringstream ss;
  ss << "top hypothesis matches brute force on " << agreed << "/" << instances << " instances";
  report("C8", agreed == instances, ss.str());
}

int run_cli(const std::string &args) {
  const std::string cmd = std::string(PALLETPROJ_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return status < 0 ? -1 : WEXITSTATUS(status);
}

// C9: degeneracy contracts through the CLI.
void criterion_degeneracy() {
  const fs::path dir = testutil::scratch_dir("acceptance_degeneracy");
  SceneModel scene = testutil::make_shelf_scene({});
  scene.samples_per_pixel = 1;
  write_text_file((dir / "scene.json").string(), serialize_scene(scene));
  PipelineConfig cfg;
  cfg.localize = testutil::test_localize_params();
  write_text_file((dir / "config.json").string(), serialize_config(cfg));

  const std::string img = (dir / "eq.ppm").string();
  bool pass = run_cli("render --scene " + (dir / "scene.json").string() + " --out " + img +
                      " --width 1024 --height 512") == 0;

  PalletPose level;
  level.position = {2000.0, -600.0, 0.0};
  write_text_file((dir / "level.json").string(), serialize_pose(level));
  const int level_exit = run_cli("localize --image " + img + " --init " +
                                 (dir / "level.json").string() + " --config " +
                                 (dir / "config.json").string() + " --out " +
                                 (dir / "o1.json").string());
  pass = pass && level_exit == 2;

  PalletPose nowhere;
  nowhere.position = {-2500.0, 1500.0, -700.0};
  write_text_file((dir / "nowhere.json").string(), serialize_pose(nowhere));
  const int contrast_exit = run_cli("localize --image " + img + " --init " +
                                    (dir / "nowhere.json").string() + " --config " +
                                    (dir / "config.json").string() + " --out " +
                                    (dir / "o2.json").string());
  pass = pass && contrast_exit == 3;

  std::ostringstream ss;
  ss << "camera-height pallet exit " << level_exit << " (want 2), uniform flanks exit "
     << contrast_exit << " (want 3)";
  report("C9", pass, ss.str());
}

// C10: byte-determinism of the CLI (timings excluded).
void criterion_determinism() {
  const fs::path dir = testutil::scratch_dir("acceptance_determinism");
  testutil::ShelfSceneSpec sspec;
  sspec.recess = 150.0;
  sspec.yaw_deg = -2.0;
  SceneModel scene = testutil::make_shelf_scene(sspec);
  scene.noise_amplitude = 0.02;  // exercise the seeded noise path too
  write_text_file((dir / "scene.json").string(), serialize_scene(scene));
  PipelineConfig cfg;
  cfg.localize = testutil::test_localize_params();
  write_text_file((dir / "config.json").string(), serialize_config(cfg));
  const PalletPose init = testutil::shelf_plane_init(
      {{2000.0 + 150.0, -600.0, -760.0}, sspec.yaw_deg}, 2000.0);
  write_text_file((dir / "init.json").string(), serialize_pose(init));

  auto render_once = [&](const std::string &tag) {
    run_cli("render --scene " + (dir / "scene.json").string() + " --out " +
            (dir / ("eq" + tag + ".ppm")).string() + " --truth " +
            (dir / ("truth" + tag + ".json")).string() + " --width 2048 --height 1024");
    return read_text_file((dir / ("eq" + tag + ".ppm")).string());
  };
  const bool render_same = render_once("A") == render_once("B") &&
                           read_text_file((dir / "truthA.json").string()) ==
                               read_text_file((dir / "truthB.json").string());

  write_text_file((dir / "plane.json").string(),
                  R"({"origin_mm": [2000, -600, -760], "normal": [-1, 0, 0],
                      "width_mm": 1600, "height_mm": 600, "res_mm": 5})");
  auto project_once = [&](const std::string &tag) {
    run_cli("project --image " + (dir / "eqA.ppm").string() + " --plane " +
            (dir / "plane.json").string() + " --out " + (dir / ("proj" + tag + ".ppm")).string());
    return read_text_file((dir / ("proj" + tag + ".ppm")).string());
  };
  const bool project_same = project_once("A") == project_once("B");

  auto detect_once = [&](const std::string &tag) {
    run_cli("detect --image " + (dir / "eqA.ppm").string() + " --config " +
            (dir / "config.json").string() + " --out " + (dir / ("det" + tag + ".json")).string());
    return read_text_file((dir / ("det" + tag + ".json")).string());
  };
  const bool detect_same = detect_once("A") == detect_once("B");

  auto localize_once = [&](const std::string &tag) {
    run_cli("localize --image " + (dir / "eqA.ppm").string() + " --init " +
            (dir / "init.json").string() + " --config " + (dir / "config.json").string() +
            " --out " + (dir / ("pose" + tag + ".json")).string());
    auto j = nlohmann::ordered_json::parse(read_text_file((dir / ("pose" + tag + ".json")).string()));
    j.erase("diagnostics");
    return j.dump(2);
  };
  const bool localize_same = localize_once("A") == localize_once("B");

  std::ostringstream ss;
  ss << "render " << (render_same ? "==" : "!=") << ", project " << (project_same ? "==" : "!=")
     << ", detect " << (detect_same ? "==" : "!=") << ", localize(minus diagnostics) "
     << (localize_same ? "==" : "!=");
  report("C10", render_same && project_same && detect_same && localize_same, ss.str());
}

}  // namespace

int main() {
  const auto t0 = clock_type::now();
  criteria_grid();
  criterion_fixture();
  criterion_runtime();
  criterion_trajectory();
  criterion_projection();
  criterion_hough();
  criterion_degeneracy();
  criterion_determinism();
  std::printf("acceptance finished in %.1f s: %s\n", seconds_since(t0),
              g_failures == 0 ? "all criteria PASS" : "FAILURES present");
  return g_failures == 0 ? 0 : 1;
}
