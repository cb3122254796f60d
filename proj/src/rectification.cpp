#include "illusion_forge/rectification.hpp"
#include "illusion_forge/image_ops.hpp"

#include <algorithm>
#include <string>

namespace illusion_forge {

PointSet disparity_points(const DisparityMap& disp, const Mask& mask) {
  const Mask use = mask && disp.valid;
  PointSet pts(use.count(), 3);
  Eigen::Index i = 0;
  for (Eigen::Index r = 0; r < disp.values.rows(); ++r) {
    for (Eigen::Index c = 0; c < disp.values.cols(); ++c) {
      if (!use(r, c)) continue;
      pts.row(i++) << static_cast<double>(c), static_cast<double>(r), static_cast<double>(disp.values(r, c));
    }
  }
  return pts;
}

DisparityMap render_plane(const PlaneParams& plane, int height, int width, double min_delta) {
  DisparityMap out = DisparityMap::invalid(height, width);
  for (int r = 0; r < height; ++r) {
    for (int c = 0; c < width; ++c) {
      const double d = plane_disparity_at(plane, double(c), double(r), min_delta);
      if (d > 0.0) {
        out.values(r, c) = static_cast<float>(d);
        out.valid(r, c) = true;
      }
    }
  }
  return out;
}

DisparityMap feather_boundary(const DisparityMap& original, const DisparityMap& plane_map, const Mask& illusion,
                              double feather_px) {
  if (original.values.rows() != plane_map.values.rows() || original.values.cols() != plane_map.values.cols() ||
      original.values.rows() != illusion.rows() || original.values.cols() != illusion.cols()) {
    throw Error(ErrorCode::Dimension, "feather: map sizes differ");
  }
  if (!(feather_px >= 0.0)) throw Error(ErrorCode::Validation, "feather: width must be non-negative");
  DisparityMap out = original;
  out.values = illusion.select(plane_map.values, original.values);
  out.valid = illusion.select(plane_map.valid, original.valid);
  if (feather_px == 0.0 || !illusion.any()) return out;

  const Grid<double> dist = distance_to_mask(illusion);
  for (Eigen::Index r = 0; r < out.values.rows(); ++r) {
    for (Eigen::Index c = 0; c < out.values.cols(); ++c) {
      const double dd = dist(r, c);
      if (illusion(r, c) || dd >= feather_px) continue;
      if (!original.valid(r, c) || !plane_map.valid(r, c)) continue;
      const double w = 1.0 - dd / feather_px;
      out.values(r, c) = static_cast<float>(w * plane_map.values(r, c) + (1.0 - w) * original.values(r, c));
    }
  }
  return out;
}

DisparityMap apply_plane(const DisparityMap& disp, const Mask& illusion, const PlaneParams& plane,
                         double feather_px, double min_delta) {
  const DisparityMap plane_map = render_plane(plane, disp.height(), disp.width(), min_delta);
  return feather_boundary(disp, plane_map, illusion, feather_px);
}

PlaneFitResult fit_support_region(const DisparityMap& disp, const RegionSet& regions, std::size_t pair_index,
                                  const RansacConfig& ransac, std::size_t min_points) {
  if (pair_index >= regions.pairs.size()) {
    throw Error(ErrorCode::Validation, "pair index " + std::to_string(pair_index) + " out of range");
  }
  if (regions.labels.rows() != disp.values.rows() || regions.labels.cols() != disp.values.cols()) {
    throw Error(ErrorCode::Dimension, "label grid and disparity sizes differ");
  }
  const PointSet support = disparity_points(disp, regions.mask_of(regions.pairs[pair_index].support));
  const std::size_t need = std::max<std::size_t>(min_points, 3);
  if (static_cast<std::size_t>(support.rows()) < need) {
    throw Error(ErrorCode::TooFewPoints, "degenerate support region: " + std::to_string(support.rows()) +
                                             " valid support points, need " + std::to_string(need));
  }
  PlaneFitResult fit = fit_plane_ransac(support, ransac);
  // a plane parallel to the disparity axis cannot rectify anything
  plane_disparity_at(fit.plane, 0.0, 0.0, ransac.min_delta);
  return fit;
}

RectifyResult rectify_region(const DisparityMap& disp, const RegionSet& regions, std::size_t pair_index,
                             const RectifyConfig& cfg) {
  RectifyResult result;
  result.fit = fit_support_region(disp, regions, pair_index, cfg.ransac, cfg.min_support_points);
  const Mask illusion = regions.mask_of(regions.pairs[pair_index].illusion);
  if (!illusion.any()) {
    result.disparity = disp;
    return result;
  }
  result.disparity = apply_plane(disp, illusion, result.fit.plane, cfg.feather_px, cfg.ransac.min_delta);
  return result;
}

DisparityMap rectify_all(const DisparityMap& disp, const RegionSet& regions, const RectifyConfig& cfg,
                         std::vector<PlaneFitResult>* fits) {
  DisparityMap current = disp;
  for (std::size_t i = 0; i < regions.pairs.size(); ++i) {
    RectifyResult r = rectify_region(current, regions, i, cfg);
    current = std::move(r.disparity);
    if (fits) fits->push_back(std::move(r.fit));
  }
  return current;
}

}  // namespace illusion_forge
