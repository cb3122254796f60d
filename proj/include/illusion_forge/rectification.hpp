#pragma once

#include "illusion_forge/grid.hpp"
#include "illusion_forge/io.hpp"
#include "illusion_forge/plane_fit.hpp"

#include <cstddef>
#include <vector>

namespace illusion_forge {

struct RectifyConfig {
  RansacConfig ransac;
  double feather_px = 8.0;
  std::size_t min_support_points = 50;
};

/// (u, v, d) rows for every valid pixel under `mask`, in row-major order.
PointSet disparity_points(const DisparityMap& disp, const Mask& mask);

/// The plane's disparity at every pixel. Pixels where the plane gives a
/// disparity ≤ 0 are invalid.
DisparityMap render_plane(const PlaneParams& plane, int height, int width, double min_delta = 1e-6);

/// Linear blend from the plane map into `original` over a band outside the
/// illusion mask: weight 1 − dist / feather_px, dist measured from pixel
/// centres to the nearest illusion pixel. Illusion pixels take `plane_map`;
/// pixels at dist ≥ feather_px keep `original`.
DisparityMap feather_boundary(const DisparityMap& original, const DisparityMap& plane_map, const Mask& illusion,
                              double feather_px);

/// Replaces the illusion region by the plane and feathers the boundary.
DisparityMap apply_plane(const DisparityMap& disp, const Mask& illusion, const PlaneParams& plane,
                         double feather_px, double min_delta = 1e-6);

/// RANSAC fit over the valid disparities of the support region of
/// `regions.pairs[pair_index]`.
PlaneFitResult fit_support_region(const DisparityMap& disp, const RegionSet& regions, std::size_t pair_index,
                                  const RansacConfig& ransac, std::size_t min_points = 3);

struct RectifyResult {
  DisparityMap disparity;
  PlaneFitResult fit;
};

/// Fits the support region of `regions.pairs[pair_index]` and rectifies its
/// illusion region.
RectifyResult rectify_region(const DisparityMap& disp, const RegionSet& regions, std::size_t pair_index,
                             const RectifyConfig& cfg);

/// Every pair in order; later pairs see the output of earlier ones.
DisparityMap rectify_all(const DisparityMap& disp, const RegionSet& regions, const RectifyConfig& cfg,
                         std::vector<PlaneFitResult>* fits = nullptr);

}  // namespace illusion_forge
