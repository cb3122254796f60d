#include "illusion_forge/raster.hpp"

#include <algorithm>
#include <cmath>

namespace illusion_forge {

Mask rasterize_polygon(const Polygon& polygon, int height, int width) {
  Mask mask = Mask::Constant(height, width, false);
  const std::size_t n = polygon.size();
  if (n < 3) return mask;
  std::vector<double> xs;
  for (int r = 0; r < height; ++r) {
    const double y = r + 0.5;
    xs.clear();
    for (std::size_t i = 0; i < n; ++i) {
      const auto& a = polygon[i];
      const auto& b = polygon[(i + 1) % n];
      // half-open in y so shared vertices are counted once
      if ((a[1] <= y) != (b[1] <= y)) {
        xs.push_back(a[0] + (y - a[1]) * (b[0] - a[0]) / (b[1] - a[1]));
      }
    }
    std::sort(xs.begin(), xs.end());
    for (std::size_t k = 0; k + 1 < xs.size(); k += 2) {
      // pixel centres strictly inside [x0, x1)
      const int c0 = std::max(0, static_cast<int>(std::ceil(xs[k] - 0.5)));
      const int c1 = std::min(width - 1, static_cast<int>(std::ceil(xs[k + 1] - 0.5)) - 1);
      for (int c = c0; c <= c1; ++c) mask(r, c) = true;
    }
  }
  return mask;
}

namespace {

// Polynomial fit of the Turbo colormap.
std::array<std::uint8_t, 3> turbo(double x) {
  x = std::clamp(x, 0.0, 1.0);
  const double r = 0.13572138 + x * (4.61539260 + x * (-42.66032258 + x * (132.13108234 + x * (-152.94239396 + x * 59.28637943))));
  const double g = 0.09140261 + x * (2.19418839 + x * (4.84296658 + x * (-14.18503333 + x * (4.27729857 + x * 2.82956604))));
  const double b = 0.10667330 + x * (12.64194608 + x * (-60.58204836 + x * (110.36276771 + x * (-89.90310912 + x * 27.34824973))));
  auto to8 = [](double v) { return static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0)); };
  return {to8(r), to8(g), to8(b)};
}

}  // namespace

RgbImage colorize(const Grid<float>& values, const Mask& valid, float lo, float hi) {
  RgbImage out(static_cast<int>(values.cols()), static_cast<int>(values.rows()));
  const double span = hi > lo ? static_cast<double>(hi) - lo : 1.0;
  for (int r = 0; r < out.height; ++r) {
    for (int c = 0; c < out.width; ++c) {
      if (!valid(r, c)) continue;
      out.set(r, c, turbo((values(r, c) - lo) / span));
    }
  }
  return out;
}

}  // namespace illusion_forge
