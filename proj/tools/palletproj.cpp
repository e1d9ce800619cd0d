#include <CLI11.hpp>

#include <filesystem>
#include <iostream>

#include "palletproj/config.hpp"
#include "palletproj/image_io.hpp"
#include "palletproj/localize.hpp"
#include "palletproj/parallel.hpp"
#include "palletproj/scene.hpp"

namespace fs = std::filesystem;
using namespace palletproj;

namespace {

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::DegenerateGeometry:
    case ErrorCode::SameHeight:
      return 2;
    case ErrorCode::LowContrast:
    case ErrorCode::NoLine:
      return 3;
    case ErrorCode::InvalidArgument:
    case ErrorCode::ParseError:
    case ErrorCode::Io:
      return 4;
    case ErrorCode::NoPalletAtDepth:
      return 5;
  }
  return 1;
}

struct RenderArgs {
  std::string scene_path, out_image, out_truth;
  int width = 2048, height = 1024;
};

int cmd_render(const RenderArgs &a) {
  const SceneModel scene = load_scene(a.scene_path);
  const EquirectImage eq = render_equirect(scene, a.width, a.height, effective_threads(0));
  write_image(a.out_image, eq.image);
  if (!a.out_truth.empty()) write_text_file(a.out_truth, serialize_ground_truth(scene));
  return 0;
}

struct ProjectArgs {
  std::string image_path, plane_path, out_image, config_path;
};

int cmd_project(const ProjectArgs &a) {
  PalletSpec pallet;
  ProjectionOptions opts;
  if (!a.config_path.empty()) {
    const PipelineConfig cfg = load_config(a.config_path);
    pallet = cfg.pallet;
    opts = cfg.localize.projection;
  }
  const EquirectImage eq{read_image(a.image_path)};
  const PlaneSpec plane = load_plane(a.plane_path, pallet);
  opts.threads = effective_threads(0);
  write_image(a.out_image, project_plane(eq, plane, opts));
  return 0;
}

struct DetectArgs {
  std::string image_path, config_path, out_path;
};

int cmd_detect(const DetectArgs &a) {
  const PipelineConfig cfg = load_config(a.config_path);
  const EquirectImage eq{read_image(a.image_path)};
  const auto detections = detect_pallets(eq, cfg.shelf_plane(), cfg.pallet, cfg.detect_params());
  write_text_file(a.out_path, serialize_detections(detections));
  std::cout << "detections: " << detections.size() << "\n";
  return 0;
}

struct LocalizeArgs {
  std::string image_path, init_path, config_path, out_path, debug_dir;
};

int cmd_localize(const LocalizeArgs &a) {
  const PipelineConfig cfg = load_config(a.config_path);
  const EquirectImage eq{read_image(a.image_path)};
  const PalletPose init = load_pose(a.init_path);

  LocalizeDebug debug;
  const LocalizeDebug *debug_ptr = nullptr;
  if (!a.debug_dir.empty()) {
    fs::create_directories(a.debug_dir);
    debug.image = [&a](const std::string &name, const RasterImage &img) {
      write_image((fs::path(a.debug_dir) / name).string(), img);
    };
    debug.text = [&a](const std::string &name, const std::string &content) {
      write_text_file((fs::path(a.debug_dir) / name).string(), content);
    };
    debug_ptr = &debug;
  }

  const LocalizeResult res = localize_pallet(eq, init, cfg.pallet, cfg.localize, debug_ptr);

  PoseRecord rec;
  rec.pose = res.pose;
  rec.score = res.score;
  rec.yaw_ms = res.yaw_ms;
  rec.position_ms = res.position_ms;
  write_text_file(a.out_path, serialize_pose_record(rec));
  std::cout << "pose: (" << res.pose.position.x << ", " << res.pose.position.y << ", "
            << res.pose.position.z << ") mm, yaw " << res.pose.yaw_deg << " deg (boundary: "
            << plane_height_name(res.height_used) << ", yaw " << res.yaw_ms << " ms, position "
            << res.position_ms << " ms)\n";
  return 0;
}

}  // namespace

int main(int argc, char **argv) {
  CLI::App app{"Pallet localization from a 360-degree image"};
  app.require_subcommand(1);

  RenderArgs render_args;
  CLI::App *render = app.add_subcommand("render", "Ray-cast a synthetic scene to an equirect image");
  render->add_option("--scene", render_args.scene_path, "Scene JSON file")->required();
  render->add_option("--out", render_args.out_image, "Output image (.ppm/.pgm/.png)")->required();
  render->add_option("--truth", render_args.out_truth, "Ground-truth pose JSON output");
  render->add_option("--width", render_args.width, "Image width (2x height)");
  render->add_option("--height", render_args.height, "Image height");

  ProjectArgs project_args;
  CLI::App *project = app.add_subcommand("project", "Project the panorama onto a plane");
  project->add_option("--image", project_args.image_path, "Equirect image")->required();
  project->add_option("--plane", project_args.plane_path, "Plane JSON file")->required();
  project->add_option("--out", project_args.out_image, "Output image")->required();
  project->add_option("--config", project_args.config_path, "Pipeline config (for pallet spec)");

  DetectArgs detect_args;
  CLI::App *detect = app.add_subcommand("detect", "Detect pallets on the shelf-front plane");
  detect->add_option("--image", detect_args.image_path, "Equirect image")->required();
  detect->add_option("--config", detect_args.config_path, "Pipeline config JSON")->required();
  detect->add_option("--out", detect_args.out_path, "Detections JSON output")->required();

  LocalizeArgs localize_args;
  CLI::App *localize = app.add_subcommand("localize", "Refine a pose: yaw from the horizontal plane, then depth");
  localize->add_option("--image", localize_args.image_path, "Equirect image")->required();
  localize->add_option("--init", localize_args.init_path, "Initial pose JSON")->required();
  localize->add_option("--config", localize_args.config_path, "Pipeline config JSON")->required();
  localize->add_option("--out", localize_args.out_path, "Pose record JSON output")->required();
  localize->add_option("--debug-dir", localize_args.debug_dir, "Directory for intermediate dumps");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    return app.exit(e);
  }

  try {
    if (render->parsed()) return cmd_render(render_args);
    if (project->parsed()) return cmd_project(project_args);
    if (detect->parsed()) return cmd_detect(detect_args);
    if (localize->parsed()) return cmd_localize(localize_args);
  } catch (const Error &e) {
    std::cerr << "error (" << error_code_name(e.code()) << "): " << e.what() << "\n";
    return exit_code_for(e.code());
  } catch (const std::exception &e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
