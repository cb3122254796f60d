#pragma once

#include "illusion_forge/grid.hpp"

#include <vector>

namespace illusion_forge {

/// Harmonic (diffusion) fill. Pixels in `fill` are first seeded layer by
/// layer from their already-known 4-neighbours, then relaxed by Jacobi
/// 4-neighbour averaging until the largest update drops below `tol` or
/// `iterations` sweeps have run. Pixels outside `fill` are never written.
/// Returns the pixels that received a value; fill components with no known
/// neighbour anywhere stay unfilled.
Mask diffuse_fill(Grid<float>& values, const Mask& fill, const Mask& known, int iterations,
                  double tol = 1e-4);

/// Colour-guided filter (local linear model per box window of side
/// 2·radius+1, clipped at the border). Guide intensities are scaled to [0, 1].
Grid<float> guided_filter(const RgbImage& guide, const Grid<float>& src, int radius, double eps);

struct Components {
  Grid<int> labels;             ///< 0 = not in mask, 1..count otherwise
  std::vector<int> areas;       ///< areas[label - 1]
};

/// 8-connected components of `mask`.
Components connected_components(const Mask& mask);

/// Euclidean distance from every pixel centre to the nearest set pixel of
/// `mask` (0 on the mask, +inf everywhere if the mask is empty).
Grid<double> distance_to_mask(const Mask& mask);

}  // namespace illusion_forge
