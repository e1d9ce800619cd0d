#include "palletproj/detect.hpp"

namespace palletproj {

std::vector<Detection> detect_pallets(const EquirectImage &eq, const PlaneSpec &shelf,
                                      const PalletSpec &spec, const DetectParams &params) {
  const double shelf_yaw = shelf_plane_yaw_deg(shelf);

  ProjectionOptions proj = params.projection;
  proj.threads = params.threads;
  const RasterImage projected = project_plane(eq, shelf, proj);
  const RasterImage gray = extract_channel(projected, params.channel);
  const RasterImage edges = sobel_magnitude(gray);

  const EdgeTemplate tmpl = build_edge_template(spec, shelf.res_mm);
  TemplateSearchParams search;
  search.stride_px = params.stride_px;
  search.theta_detect = params.theta_detect;
  search.tau_edge = params.tau_edge;
  search.threads = params.threads;

  std::vector<Detection> out;
  for (const TemplateMatch &m : template_search(edges, tmpl, search)) {
    Detection d;
    d.pose.position = plane_pixel_to_world(shelf, m.offset.u, m.offset.v);
    d.pose.yaw_deg = shelf_yaw;
    d.score = m.score;
    d.plane = shelf;
    d.offset_px = m.offset;
    out.push_back(d);
  }
  return out;
}

}  // namespace palletproj
