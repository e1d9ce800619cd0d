#include "palletproj/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace palletproj {

namespace {

using json = nlohmann::ordered_json;

// Wraps one JSON object, tracks consumed keys, and rejects leftovers.
class ObjectReader {
 public:
  ObjectReader(const json &obj, std::string path) : obj_(obj), path_(std::move(path)) {
    if (!obj_.is_object())
      throw_error(ErrorCode::ParseError, path_ + " must be an object");
  }

  bool has(const std::string &key) {
    return obj_.contains(key);
  }

  const json *take(const std::string &key) {
    if (!obj_.contains(key)) return nullptr;
    seen_.insert(key);
    return &obj_.at(key);
  }

  const json &require(const std::string &key) {
    const json *j = take(key);
    if (!j) throw_error(ErrorCode::ParseError, path_ + " is missing required key '" + key + "'");
    return *j;
  }

  void finish() const {
    for (const auto &item : obj_.items())
      if (!seen_.count(item.key()))
        throw_error(ErrorCode::ParseError, "unknown key '" + path_ + "." + item.key() + "'");
  }

  const std::string &path() const { return path_; }

 private:
  const json &obj_;
  std::string path_;
  std::set<std::string> seen_;
};

double as_number(const json &j, const std::string &path) {
  if (!j.is_number()) throw_error(ErrorCode::ParseError, path + " must be a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) throw_error(ErrorCode::ParseError, path + " must be finite");
  return v;
}

double number_or(ObjectReader &r, const std::string &key, double fallback) {
  const json *j = r.take(key);
  return j ? as_number(*j, r.path() + "." + key) : fallback;
}

int int_or(ObjectReader &r, const std::string &key, int fallback) {
  const json *j = r.take(key);
  if (!j) return fallback;
  const double v = as_number(*j, r.path() + "." + key);
  if (v != std::floor(v)) throw_error(ErrorCode::ParseError, r.path() + "." + key + " must be an integer");
  return static_cast<int>(v);
}

bool bool_or(ObjectReader &r, const std::string &key, bool fallback) {
  const json *j = r.take(key);
  if (!j) return fallback;
  if (!j->is_boolean()) throw_error(ErrorCode::ParseError, r.path() + "." + key + " must be a boolean");
  return j->get<bool>();
}

std::string string_or(ObjectReader &r, const std::string &key, const std::string &fallback) {
  const json *j = r.take(key);
  if (!j) return fallback;
  if (!j->is_string()) throw_error(ErrorCode::ParseError, r.path() + "." + key + " must be a string");
  return j->get<std::string>();
}

Vec3 as_vec3(const json &j, const std::string &path) {
  if (!j.is_array() || j.size() != 3)
    throw_error(ErrorCode::ParseError, path + " must be an array of 3 numbers");
  return {as_number(j[0], path), as_number(j[1], path), as_number(j[2], path)};
}

Vec3 vec3_or(ObjectReader &r, const std::string &key, const Vec3 &fallback) {
  const json *j = r.take(key);
  return j ? as_vec3(*j, r.path() + "." + key) : fallback;
}

json vec3_json(const Vec3 &v) { return json::array({v.x, v.y, v.z}); }

void check(bool ok, const std::string &what) {
  if (!ok) throw_error(ErrorCode::ParseError, "config value out of range: " + what);
}

Channel parse_channel(const std::string &s, const std::string &path) {
  if (s == "R") return Channel::R;
  if (s == "G") return Channel::G;
  if (s == "B") return Channel::B;
  if (s == "luminance") return Channel::Luminance;
  throw_error(ErrorCode::ParseError, path + " must be one of R, G, B, luminance");
}

const char *channel_name(Channel c) {
  switch (c) {
    case Channel::R: return "R";
    case Channel::G: return "G";
    case Channel::B: return "B";
    case Channel::Luminance: return "luminance";
  }
  return "?";
}

PalletSpec parse_pallet(const json &j, const std::string &path) {
  ObjectReader r(j, path);
  PalletSpec defaults;
  PalletSpec p;
  p.width_mm = number_or(r, "width_mm", defaults.width_mm);
  p.height_mm = number_or(r, "height_mm", defaults.height_mm);
  p.hole_width_mm = number_or(r, "hole_width_mm", defaults.hole_width_mm);
  p.hole_height_mm = number_or(r, "hole_height_mm", defaults.hole_height_mm);
  p.hole_offset_mm = number_or(r, "hole_offset_mm", defaults.hole_offset_mm);
  p.hole_bottom_mm = number_or(r, "hole_bottom_mm", defaults.hole_bottom_mm);
  p.corner_radius_mm = number_or(r, "corner_radius_mm", defaults.corner_radius_mm);
  r.finish();
  p.validate();
  return p;
}

json pallet_json(const PalletSpec &p) {
  json j;
  j["width_mm"] = p.width_mm;
  j["height_mm"] = p.height_mm;
  j["hole_width_mm"] = p.hole_width_mm;
  j["hole_height_mm"] = p.hole_height_mm;
  j["hole_offset_mm"] = p.hole_offset_mm;
  j["hole_bottom_mm"] = p.hole_bottom_mm;
  j["corner_radius_mm"] = p.corner_radius_mm;
  return j;
}

PalletPose parse_pose_json(const json &j, const std::string &path) {
  ObjectReader r(j, path);
  PalletPose pose;
  pose.position = as_vec3(r.require("position_mm"), path + ".position_mm");
  pose.yaw_deg = as_number(r.require("yaw_deg"), path + ".yaw_deg");
  const std::string frame = string_or(r, "frame", "camera");
  if (frame != "camera")
    throw_error(ErrorCode::ParseError, path + ".frame must be \"camera\"");
  r.finish();
  pose.validate();
  return pose;
}

json pose_json(const PalletPose &pose) {
  json j;
  j["position_mm"] = vec3_json(pose.position);
  j["yaw_deg"] = pose.yaw_deg;
  j["frame"] = "camera";
  return j;
}

json parse_text(const std::string &text) {
  json j = json::parse(text, nullptr, /*allow_exceptions=*/false);
  if (j.is_discarded()) throw_error(ErrorCode::ParseError, "invalid JSON");
  return j;
}

}  // namespace

DetectParams PipelineConfig::detect_params() const {
  DetectParams d;
  d.channel = localize.channel;
  d.tau_edge = localize.tau_edge;
  d.theta_detect = localize.theta_detect;
  d.stride_px = detect_stride_px;
  d.projection = localize.projection;
  d.threads = localize.threads;
  return d;
}

void PipelineConfig::validate() const {
  const LocalizeParams &lp = localize;
  check(lp.hough.theta_window_deg > 0 && lp.hough.theta_window_deg <= 85, "hough.theta_window_deg in (0, 85]");
  check(lp.hough.theta_step_deg > 0 && lp.hough.theta_step_deg <= lp.hough.theta_window_deg,
        "hough.theta_step_deg in (0, theta_window]");
  check(lp.hough.rho_step_px > 0, "hough.rho_step_px > 0");
  check(lp.flank_width_px >= 1 && lp.flank_width_px <= 1000, "flank.width_px in [1, 1000]");
  check(lp.flank_height_px >= 2 && lp.flank_height_px <= 10000, "flank.height_px in [2, 10000]");
  check(lp.contrast_min >= 0 && lp.contrast_min <= 1, "flank.contrast_min in [0, 1]");
  check(lp.tau_edge > 0 && lp.tau_edge <= 1, "tau_edge in (0, 1]");
  check(lp.theta_detect > 0 && lp.theta_detect <= 1, "theta_detect in (0, 1]");
  check(detect_stride_px >= 1, "detect_stride_px >= 1");
  check(lp.range_lo_mm <= 0 && lp.range_hi_mm >= 0, "depth_sweep.range_mm must contain 0");
  check(lp.coarse_step_mm > 0 && lp.fine_step_mm > 0 && lp.fine_step_mm <= lp.coarse_step_mm,
        "depth_sweep steps positive with fine <= coarse");
  check(lp.search_px >= 0 && lp.search_px <= 200, "depth_sweep.search_px in [0, 200]");
  check(lp.h_min_mm > 0, "h_min_mm > 0");
  check(lp.projection.eps_plane_mm >= 0, "eps_plane_mm >= 0");
  check(lp.residual_tol_deg > 0, "residual_tol_deg > 0");
  check(lp.hplane_width_mm > 0 && lp.hplane_margin_mm >= 0 && lp.hplane_res_mm > 0,
        "horizontal_plane extents positive");
  check(lp.face_plane_margin_mm >= 0 && lp.face_plane_res_mm > 0, "face_plane extents positive");
  check(lp.threads >= 0, "threads >= 0");
  check(shelf_res_mm > 0 && shelf_width_mm > 0 && shelf_height_mm > 0, "shelf plane extents positive");
  pallet.validate();
  if (std::abs(shelf_normal.z) > 1e-9 || std::abs(shelf_normal.norm() - 1.0) > 1e-9)
    throw_error(ErrorCode::ParseError, "shelf_plane.normal must be horizontal and unit length");
}

PipelineConfig parse_config(const std::string &json_text) {
  const json root = parse_text(json_text);
  ObjectReader r(root, "config");
  PipelineConfig cfg;
  LocalizeParams &lp = cfg.localize;

  lp.channel = parse_channel(string_or(r, "channel", "luminance"), "config.channel");
  const std::string method = string_or(r, "boundary_method", "flank_threshold");
  if (method == "flank_threshold") lp.boundary_method = BoundaryMethod::FlankThreshold;
  else if (method == "edge_hough") lp.boundary_method = BoundaryMethod::EdgeHough;
  else throw_error(ErrorCode::ParseError, "config.boundary_method must be flank_threshold or edge_hough");

  if (const json *j = r.take("hough")) {
    ObjectReader h(*j, "config.hough");
    lp.hough.theta_window_deg = number_or(h, "theta_window_deg", lp.hough.theta_window_deg);
    lp.hough.theta_step_deg = number_or(h, "theta_step_deg", lp.hough.theta_step_deg);
    lp.hough.rho_step_px = number_or(h, "rho_step_px", lp.hough.rho_step_px);
    h.finish();
  }
  if (const json *j = r.take("flank")) {
    ObjectReader f(*j, "config.flank");
    lp.flank_width_px = int_or(f, "width_px", lp.flank_width_px);
    lp.flank_height_px = int_or(f, "height_px", lp.flank_height_px);
    lp.contrast_min = number_or(f, "contrast_min", lp.contrast_min);
    f.finish();
  }
  lp.tau_edge = number_or(r, "tau_edge", lp.tau_edge);
  lp.theta_detect = number_or(r, "theta_detect", lp.theta_detect);
  cfg.detect_stride_px = number_or(r, "detect_stride_px", cfg.detect_stride_px);
  if (const json *j = r.take("depth_sweep")) {
    ObjectReader d(*j, "config.depth_sweep");
    if (const json *range = d.take("range_mm")) {
      if (!range->is_array() || range->size() != 2)
        throw_error(ErrorCode::ParseError, "config.depth_sweep.range_mm must be [lo, hi]");
      lp.range_lo_mm = as_number((*range)[0], "range_mm[0]");
      lp.range_hi_mm = as_number((*range)[1], "range_mm[1]");
    }
    lp.coarse_step_mm = number_or(d, "coarse_step_mm", lp.coarse_step_mm);
    lp.fine_step_mm = number_or(d, "fine_step_mm", lp.fine_step_mm);
    lp.search_px = int_or(d, "search_px", lp.search_px);
    d.finish();
  }
  lp.h_min_mm = number_or(r, "h_min_mm", lp.h_min_mm);
  lp.projection.eps_plane_mm = number_or(r, "eps_plane_mm", lp.projection.eps_plane_mm);
  lp.residual_tol_deg = number_or(r, "residual_tol_deg", lp.residual_tol_deg);
  lp.prefer_hole_top = bool_or(r, "prefer_hole_top", lp.prefer_hole_top);
  lp.hole_top_fallback = bool_or(r, "hole_top_fallback", lp.hole_top_fallback);
  if (const json *j = r.take("horizontal_plane")) {
    ObjectReader h(*j, "config.horizontal_plane");
    lp.hplane_width_mm = number_or(h, "width_mm", lp.hplane_width_mm);
    lp.hplane_margin_mm = number_or(h, "margin_mm", lp.hplane_margin_mm);
    lp.hplane_res_mm = number_or(h, "res_mm", lp.hplane_res_mm);
    h.finish();
  }
  if (const json *j = r.take("face_plane")) {
    ObjectReader f(*j, "config.face_plane");
    lp.face_plane_margin_mm = number_or(f, "margin_mm", lp.face_plane_margin_mm);
    lp.face_plane_res_mm = number_or(f, "res_mm", lp.face_plane_res_mm);
    f.finish();
  }
  if (const json *j = r.take("camera_rotation")) {
    if (!j->is_array() || j->size() != 9)
      throw_error(ErrorCode::ParseError, "config.camera_rotation must be 9 numbers (row-major)");
    Mat3 rot;
    for (int i = 0; i < 9; ++i) rot.m[i] = as_number((*j)[i], "camera_rotation");
    // Cheap orthonormality check: rows must be unit and mutually orthogonal.
    for (int a = 0; a < 3; ++a) {
      const Vec3 ra{rot.m[a * 3], rot.m[a * 3 + 1], rot.m[a * 3 + 2]};
      if (std::abs(ra.norm() - 1.0) > 1e-6)
        throw_error(ErrorCode::ParseError, "camera_rotation rows must be unit length");
      for (int b = a + 1; b < 3; ++b) {
        const Vec3 rb{rot.m[b * 3], rot.m[b * 3 + 1], rot.m[b * 3 + 2]};
        if (std::abs(ra.dot(rb)) > 1e-6)
          throw_error(ErrorCode::ParseError, "camera_rotation rows must be orthogonal");
      }
    }
    lp.projection.ray_rotation = rot;
  }
  lp.threads = int_or(r, "threads", lp.threads);
  if (const json *j = r.take("pallet")) cfg.pallet = parse_pallet(*j, "config.pallet");
  if (const json *j = r.take("shelf_plane")) {
    ObjectReader s(*j, "config.shelf_plane");
    cfg.shelf_origin = vec3_or(s, "origin_mm", cfg.shelf_origin);
    cfg.shelf_normal = vec3_or(s, "normal", cfg.shelf_normal);
    cfg.shelf_width_mm = number_or(s, "width_mm", cfg.shelf_width_mm);
    cfg.shelf_height_mm = number_or(s, "height_mm", cfg.shelf_height_mm);
    cfg.shelf_res_mm = number_or(s, "res_mm", cfg.shelf_res_mm);
    s.finish();
  }
  r.finish();
  cfg.validate();
  return cfg;
}

std::string serialize_config(const PipelineConfig &cfg) {
  const LocalizeParams &lp = cfg.localize;
  json j;
  j["channel"] = channel_name(lp.channel);
  j["boundary_method"] =
      lp.boundary_method == BoundaryMethod::FlankThreshold ? "flank_threshold" : "edge_hough";
  j["hough"] = {{"theta_window_deg", lp.hough.theta_window_deg},
                {"theta_step_deg", lp.hough.theta_step_deg},
                {"rho_step_px", lp.hough.rho_step_px}};
  j["flank"] = {{"width_px", lp.flank_width_px},
                {"height_px", lp.flank_height_px},
                {"contrast_min", lp.contrast_min}};
  j["tau_edge"] = lp.tau_edge;
  j["theta_detect"] = lp.theta_detect;
  j["detect_stride_px"] = cfg.detect_stride_px;
  j["depth_sweep"] = {{"range_mm", json::array({lp.range_lo_mm, lp.range_hi_mm})},
                      {"coarse_step_mm", lp.coarse_step_mm},
                      {"fine_step_mm", lp.fine_step_mm},
                      {"search_px", lp.search_px}};
  j["h_min_mm"] = lp.h_min_mm;
  j["eps_plane_mm"] = lp.projection.eps_plane_mm;
  j["residual_tol_deg"] = lp.residual_tol_deg;
  j["prefer_hole_top"] = lp.prefer_hole_top;
  j["hole_top_fallback"] = lp.hole_top_fallback;
  j["horizontal_plane"] = {{"width_mm", lp.hplane_width_mm},
                           {"margin_mm", lp.hplane_margin_mm},
                           {"res_mm", lp.hplane_res_mm}};
  j["face_plane"] = {{"margin_mm", lp.face_plane_margin_mm}, {"res_mm", lp.face_plane_res_mm}};
  if (!lp.projection.ray_rotation.is_identity()) {
    json rot = json::array();
    for (int i = 0; i < 9; ++i) rot.push_back(lp.projection.ray_rotation.m[i]);
    j["camera_rotation"] = rot;
  }
  j["threads"] = lp.threads;
  j["pallet"] = pallet_json(cfg.pallet);
  j["shelf_plane"] = {{"origin_mm", vec3_json(cfg.shelf_origin)},
                      {"normal", vec3_json(cfg.shelf_normal)},
                      {"width_mm", cfg.shelf_width_mm},
                      {"height_mm", cfg.shelf_height_mm},
                      {"res_mm", cfg.shelf_res_mm}};
  return j.dump(2) + "\n";
}

PipelineConfig load_config(const std::string &path) { return parse_config(read_text_file(path)); }

std::string serialize_pose_record(const PoseRecord &rec) {
  json j = pose_json(rec.pose);
  j["score"] = rec.score;
  j["diagnostics"] = {{"timings_ms",
                       {{"yaw", rec.yaw_ms},
                        {"position", rec.position_ms},
                        {"total", rec.yaw_ms + rec.position_ms}}}};
  return j.dump(2) + "\n";
}

PoseRecord parse_pose_record(const std::string &json_text) {
  const json root = parse_text(json_text);
  ObjectReader r(root, "pose_record");
  PoseRecord rec;
  rec.pose.position = as_vec3(r.require("position_mm"), "pose_record.position_mm");
  rec.pose.yaw_deg = as_number(r.require("yaw_deg"), "pose_record.yaw_deg");
  const std::string frame = string_or(r, "frame", "camera");
  if (frame != "camera") throw_error(ErrorCode::ParseError, "pose_record.frame must be \"camera\"");
  rec.score = number_or(r, "score", 0.0);
  if (const json *diag = r.take("diagnostics")) {
    ObjectReader d(*diag, "pose_record.diagnostics");
    if (const json *t = d.take("timings_ms")) {
      ObjectReader tm(*t, "pose_record.diagnostics.timings_ms");
      rec.yaw_ms = number_or(tm, "yaw", 0.0);
      rec.position_ms = number_or(tm, "position", 0.0);
      tm.take("total");
      tm.finish();
    }
    d.finish();
  }
  r.finish();
  rec.pose.validate();
  return rec;
}

PalletPose parse_pose(const std::string &json_text) {
  return parse_pose_json(parse_text(json_text), "pose");
}

std::string serialize_pose(const PalletPose &pose) { return pose_json(pose).dump(2) + "\n"; }

PalletPose load_pose(const std::string &path) { return parse_pose(read_text_file(path)); }

std::string serialize_detections(const std::vector<Detection> &ds) {
  json j;
  j["count"] = ds.size();
  json arr = json::array();
  for (const Detection &d : ds) {
    json e;
    e["position_mm"] = vec3_json(d.pose.position);
    e["yaw_deg"] = d.pose.yaw_deg;
    e["score"] = d.score;
    e["offset_px"] = json::array({d.offset_px.u, d.offset_px.v});
    arr.push_back(e);
  }
  j["detections"] = arr;
  return j.dump(2) + "\n";
}

SceneModel parse_scene(const std::string &json_text) {
  const json root = parse_text(json_text);
  ObjectReader r(root, "scene");
  SceneModel s;
  s.background = vec3_or(r, "background", s.background);
  if (const json *f = r.take("floor")) {
    if (f->is_null()) {
      s.has_floor = false;
    } else {
      ObjectReader fr(*f, "scene.floor");
      s.floor_z_mm = number_or(fr, "z_mm", s.floor_z_mm);
      s.floor_color = vec3_or(fr, "color", s.floor_color);
      fr.finish();
    }
  }
  if (const json *boxes = r.take("boxes")) {
    if (!boxes->is_array()) throw_error(ErrorCode::ParseError, "scene.boxes must be an array");
    for (size_t i = 0; i < boxes->size(); ++i) {
      ObjectReader br((*boxes)[i], "scene.boxes[" + std::to_string(i) + "]");
      SceneBox b;
      b.min = as_vec3(br.require("min_mm"), br.path() + ".min_mm");
      b.max = as_vec3(br.require("max_mm"), br.path() + ".max_mm");
      b.color = vec3_or(br, "color", {0.5, 0.5, 0.5});
      br.finish();
      if (!(b.min.x <= b.max.x && b.min.y <= b.max.y && b.min.z <= b.max.z))
        throw_error(ErrorCode::ParseError, br.path() + ": min must not exceed max");
      s.boxes.push_back(b);
    }
  }
  if (const json *pallets = r.take("pallets")) {
    if (!pallets->is_array()) throw_error(ErrorCode::ParseError, "scene.pallets must be an array");
    for (size_t i = 0; i < pallets->size(); ++i) {
      ObjectReader pr((*pallets)[i], "scene.pallets[" + std::to_string(i) + "]");
      ScenePallet p;
      if (const json *spec = pr.take("spec")) p.spec = parse_pallet(*spec, pr.path() + ".spec");
      p.pose = parse_pose_json(pr.require("pose"), pr.path() + ".pose");
      p.face_color = vec3_or(pr, "face_color", p.face_color);
      p.hole_color = vec3_or(pr, "hole_color", p.hole_color);
      p.body_depth_mm = number_or(pr, "body_depth_mm", p.body_depth_mm);
      pr.finish();
      if (!(p.body_depth_mm > 0))
        throw_error(ErrorCode::ParseError, pr.path() + ".body_depth_mm must be positive");
      s.pallets.push_back(p);
    }
  }
  if (const json *stripes = r.take("stripes")) {
    if (!stripes->is_array()) throw_error(ErrorCode::ParseError, "scene.stripes must be an array");
    for (size_t i = 0; i < stripes->size(); ++i) {
      ObjectReader sr((*stripes)[i], "scene.stripes[" + std::to_string(i) + "]");
      SceneStripe st;
      st.origin = as_vec3(sr.require("origin_mm"), sr.path() + ".origin_mm");
      st.edge_u = as_vec3(sr.require("edge_u_mm"), sr.path() + ".edge_u_mm");
      st.edge_v = as_vec3(sr.require("edge_v_mm"), sr.path() + ".edge_v_mm");
      st.color = vec3_or(sr, "color", {0.1, 0.1, 0.1});
      sr.finish();
      s.stripes.push_back(st);
    }
  }
  if (const json *noise = r.take("noise")) {
    ObjectReader nr(*noise, "scene.noise");
    s.noise_amplitude = number_or(nr, "amplitude", s.noise_amplitude);
    s.noise_seed = static_cast<unsigned long>(int_or(nr, "seed", static_cast<int>(s.noise_seed)));
    nr.finish();
    if (s.noise_amplitude < 0 || s.noise_amplitude > 1)
      throw_error(ErrorCode::ParseError, "scene.noise.amplitude must lie in [0, 1]");
  }
  s.samples_per_pixel = int_or(r, "samples_per_pixel", s.samples_per_pixel);
  if (s.samples_per_pixel < 1 || s.samples_per_pixel > 8)
    throw_error(ErrorCode::ParseError, "scene.samples_per_pixel must lie in [1, 8]");
  r.finish();
  return s;
}

std::string serialize_scene(const SceneModel &s) {
  json j;
  j["background"] = vec3_json(s.background);
  if (s.has_floor)
    j["floor"] = {{"z_mm", s.floor_z_mm}, {"color", vec3_json(s.floor_color)}};
  else
    j["floor"] = nullptr;
  json boxes = json::array();
  for (const SceneBox &b : s.boxes)
    boxes.push_back({{"min_mm", vec3_json(b.min)}, {"max_mm", vec3_json(b.max)}, {"color", vec3_json(b.color)}});
  j["boxes"] = boxes;
  json pallets = json::array();
  for (const ScenePallet &p : s.pallets) {
    json e;
    e["spec"] = pallet_json(p.spec);
    e["pose"] = pose_json(p.pose);
    e["face_color"] = vec3_json(p.face_color);
    e["hole_color"] = vec3_json(p.hole_color);
    e["body_depth_mm"] = p.body_depth_mm;
    pallets.push_back(e);
  }
  j["pallets"] = pallets;
  json stripes = json::array();
  for (const SceneStripe &st : s.stripes)
    stripes.push_back({{"origin_mm", vec3_json(st.origin)},
                       {"edge_u_mm", vec3_json(st.edge_u)},
                       {"edge_v_mm", vec3_json(st.edge_v)},
                       {"color", vec3_json(st.color)}});
  j["stripes"] = stripes;
  j["noise"] = {{"amplitude", s.noise_amplitude}, {"seed", s.noise_seed}};
  j["samples_per_pixel"] = s.samples_per_pixel;
  return j.dump(2) + "\n";
}

SceneModel load_scene(const std::string &path) { return parse_scene(read_text_file(path)); }

std::string serialize_ground_truth(const SceneModel &scene) {
  json arr = json::array();
  for (size_t i = 0; i < scene.pallets.size(); ++i) {
    const GroundTruthEntry gt = ground_truth(scene, static_cast<int>(i));
    json e;
    e["position_mm"] = vec3_json(gt.pose.position);
    e["yaw_deg"] = gt.pose.yaw_deg;
    e["below_camera"] = gt.below_camera;
    e["suggested_plane"] = plane_height_name(gt.suggested_height);
    arr.push_back(e);
  }
  json j;
  j["pallets"] = arr;
  return j.dump(2) + "\n";
}

PlaneSpec parse_plane(const std::string &json_text, const PalletSpec &pallet_for_horizontal) {
  const json root = parse_text(json_text);
  ObjectReader r(root, "plane");
  if (r.has("normal")) {
    const Vec3 origin = as_vec3(r.require("origin_mm"), "plane.origin_mm");
    const Vec3 normal = as_vec3(r.require("normal"), "plane.normal");
    const double w = as_number(r.require("width_mm"), "plane.width_mm");
    const double h = as_number(r.require("height_mm"), "plane.height_mm");
    const double res = as_number(r.require("res_mm"), "plane.res_mm");
    r.finish();
    try {
      return make_shelf_plane(origin, normal, w, h, res);
    } catch (const Error &e) {
      throw_error(ErrorCode::ParseError, std::string("plane: ") + e.what());
    }
  }
  if (r.has("horizontal")) {
    ObjectReader h(*r.take("horizontal"), "plane.horizontal");
    const PalletPose pose = parse_pose_json(h.require("pose"), "plane.horizontal.pose");
    const std::string which = string_or(h, "which", "bottom");
    PlaneHeight height;
    if (which == "bottom") height = PlaneHeight::Bottom;
    else if (which == "top") height = PlaneHeight::Top;
    else if (which == "hole_top") height = PlaneHeight::HoleTop;
    else throw_error(ErrorCode::ParseError, "plane.horizontal.which must be bottom, top or hole_top");
    const double w = as_number(h.require("width_mm"), "plane.horizontal.width_mm");
    const double hh = as_number(h.require("height_mm"), "plane.horizontal.height_mm");
    const double res = as_number(h.require("res_mm"), "plane.horizontal.res_mm");
    const double h_min = number_or(h, "h_min_mm", 100.0);
    h.finish();
    r.finish();
    return make_horizontal_plane(pose, pallet_for_horizontal, height, w, hh, res, h_min);
  }
  PlaneSpec p;
  p.origin = as_vec3(r.require("origin_mm"), "plane.origin_mm");
  p.ex = as_vec3(r.require("ex"), "plane.ex");
  p.ey = as_vec3(r.require("ey"), "plane.ey");
  p.width_mm = as_number(r.require("width_mm"), "plane.width_mm");
  p.height_mm = as_number(r.require("height_mm"), "plane.height_mm");
  p.res_mm = as_number(r.require("res_mm"), "plane.res_mm");
  r.finish();
  try {
    p.validate();
  } catch (const Error &e) {
    throw_error(ErrorCode::ParseError, std::string("plane: ") + e.what());
  }
  return p;
}

PlaneSpec load_plane(const std::string &path, const PalletSpec &pallet_for_horizontal) {
  return parse_plane(read_text_file(path), pallet_for_horizontal);
}

std::string read_text_file(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw_error(ErrorCode::Io, "cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::string &path, const std::string &content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw_error(ErrorCode::Io, "cannot write " + path);
  out << content;
  if (!out) throw_error(ErrorCode::Io, "short write to " + path);
}

}  // namespace palletproj
