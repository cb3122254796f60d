#pragma once

#include "illusion_forge/grid.hpp"

#include <array>
#include <vector>

namespace illusion_forge {

using Polygon = std::vector<std::array<double, 2>>;  // (x, y) image coordinates

/// Even-odd fill sampled at pixel centres (col + 0.5, row + 0.5).
Mask rasterize_polygon(const Polygon& polygon, int height, int width);

/// Turbo-like colour ramp over [lo, hi]; invalid pixels are black.
RgbImage colorize(const Grid<float>& values, const Mask& valid, float lo, float hi);

}  // namespace illusion_forge
