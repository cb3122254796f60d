#pragma once

#include "illusion_forge/grid.hpp"

namespace illusion_forge {

struct ScaleSearchConfig {
  double tau = 0.9;  ///< target fraction of pixels that stay inside the image
  double epsilon = 1e-6;
  int max_iterations = 64;

  void validate() const;
};

/// Fraction of pixels with 0 ≤ u − s·d < W. Invalid pixels count as d = 0.
double valid_ratio(const DisparityMap& disp, double scale);

/// Bisection on [0, W / (4·max d)] for the largest scale whose valid ratio
/// still reaches `tau`.
double search_scale(const DisparityMap& disp, const ScaleSearchConfig& cfg = {});

struct WarpResult {
  RgbImage image;
  Mask hole_mask;
  Grid<float> source_disparity;  ///< winning source d; 0 at holes
};

/// Forward-warps the left view to the right: source (u, v) lands on
/// ⌊u − s·d⌋ and ⌈u − s·d⌉. Collisions keep the largest d, then the larger
/// source u.
WarpResult forward_warp(const RgbImage& left, const DisparityMap& disp, double scale);

/// Diffusion fill of `holes`, per channel.
RgbImage inpaint_holes(const RgbImage& image, const Mask& holes, int iterations = 64);

}  // namespace illusion_forge
