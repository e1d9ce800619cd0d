#pragma once

#include <optional>
#include <string>

#include "palletproj/detect.hpp"
#include "palletproj/localize.hpp"
#include "palletproj/scene.hpp"

namespace palletproj {

// Everything tunable in one place, read from a JSON config file. Unknown keys
// are rejected and every numeric field is range-checked on parse.
struct PipelineConfig {
  LocalizeParams localize;
  double detect_stride_px = 4.0;
  PalletSpec pallet;
  // Shelf front as origin + outward normal + extent.
  Vec3 shelf_origin{2000.0, 0.0, 0.0};
  Vec3 shelf_normal{-1.0, 0.0, 0.0};
  double shelf_width_mm = 4000.0;
  double shelf_height_mm = 2000.0;
  double shelf_res_mm = 5.0;

  PlaneSpec shelf_plane() const {
    return make_shelf_plane(shelf_origin, shelf_normal, shelf_width_mm, shelf_height_mm,
                            shelf_res_mm);
  }
  DetectParams detect_params() const;
  void validate() const;
};

PipelineConfig parse_config(const std::string &json_text);
std::string serialize_config(const PipelineConfig &cfg);
PipelineConfig load_config(const std::string &path);

// Final pose output: position and yaw in the camera frame plus the matching
// score. Timings live in a separate diagnostics block so tools comparing
// outputs can drop it wholesale.
struct PoseRecord {
  PalletPose pose;
  double score = 0.0;
  double yaw_ms = 0.0;
  double position_ms = 0.0;
};

std::string serialize_pose_record(const PoseRecord &rec);
PoseRecord parse_pose_record(const std::string &json_text);

// Initial pose files contain just position + yaw.
PalletPose parse_pose(const std::string &json_text);
std::string serialize_pose(const PalletPose &pose);
PalletPose load_pose(const std::string &path);

std::string serialize_detections(const std::vector<Detection> &ds);

// Scene files for the synthetic renderer.
SceneModel parse_scene(const std::string &json_text);
std::string serialize_scene(const SceneModel &scene);
SceneModel load_scene(const std::string &path);

std::string serialize_ground_truth(const SceneModel &scene);

// Plane files for the `project` subcommand: either a raw frame
// (origin/ex/ey) or a shelf/horizontal shorthand.
PlaneSpec parse_plane(const std::string &json_text, const PalletSpec &pallet_for_horizontal);
PlaneSpec load_plane(const std::string &path, const PalletSpec &pallet_for_horizontal);

std::string read_text_file(const std::string &path);
void write_text_file(const std::string &path, const std::string &content);

}  // namespace palletproj
