#include "illusion_forge/view_synthesis.hpp"
#include "illusion_forge/error.hpp"
#include "illusion_forge/image_ops.hpp"

#include <algorithm>
#include <cmath>

namespace illusion_forge {

void ScaleSearchConfig::validate() const {
  if (!(tau > 0.0 && tau <= 1.0)) throw Error(ErrorCode::Validation, "scale search: tau must be in (0, 1]");
  if (!(epsilon > 0.0)) throw Error(ErrorCode::Validation, "scale search: epsilon must be positive");
  if (max_iterations < 1) throw Error(ErrorCode::Validation, "scale search: max iterations must be >= 1");
}

namespace {

std::size_t count_inside(const DisparityMap& disp, double scale) {
  const double w = disp.width();
  std::size_t inside = 0;
  for (Eigen::Index r = 0; r < disp.values.rows(); ++r) {
    for (Eigen::Index c = 0; c < disp.values.cols(); ++c) {
      const double d = disp.valid(r, c) ? disp.values(r, c) : 0.0;
      const double u = static_cast<double>(c) - scale * d;
      if (u >= 0.0 && u < w) ++inside;
    }
  }
  return inside;
}

}  // namespace

double valid_ratio(const DisparityMap& disp, double scale) {
  return static_cast<double>(count_inside(disp, scale)) / static_cast<double>(disp.values.size());
}

double search_scale(const DisparityMap& disp, const ScaleSearchConfig& cfg) {
  cfg.validate();
  const float max_d = disp.max_valid();
  if (!(max_d > 0.0f)) {
    throw Error(ErrorCode::UndefinedScale, "scale search: maximum disparity is 0, scale is undefined");
  }
  const double n = static_cast<double>(disp.values.size());
  // η ≥ τ compared on counts; the guard absorbs representation error in τ·N
  const double required = std::ceil(cfg.tau * n - 1e-9 * n);
  double lo = 0.0;
  double hi = disp.width() / (4.0 * max_d);
  for (int t = 0; std::abs(hi - lo) > cfg.epsilon && t < cfg.max_iterations; ++t) {
    const double s = 0.5 * (lo + hi);
    if (static_cast<double>(count_inside(disp, s)) >= required) {
      lo = s;
    } else {
      hi = s;
    }
  }
  return 0.5 * (lo + hi);
}

WarpResult forward_warp(const RgbImage& left, const DisparityMap& disp, double scale) {
  if (left.width != disp.width() || left.height != disp.height()) {
    throw Error(ErrorCode::Dimension, "forward_warp: image and disparity sizes differ");
  }
  const int w = left.width, h = left.height;
  WarpResult out{RgbImage(w, h), Mask::Constant(h, w, true), Grid<float>::Zero(h, w)};
  Grid<int> winner = Grid<int>::Constant(h, w, -1);
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      if (!disp.valid(r, c)) continue;
      const float d = disp.values(r, c);
      const double target = static_cast<double>(c) - scale * d;
      const double lo = std::floor(target), hi = std::ceil(target);
      for (double t : {lo, hi}) {
        if (t < 0.0 || t >= w) continue;
        const int tc = static_cast<int>(t);
        const int prev = winner(r, tc);
        // sources visited in increasing u, so ">=" keeps the larger u on ties
        if (prev < 0 || d >= disp.values(r, prev)) winner(r, tc) = c;
      }
    }
  }
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      const int src = winner(r, c);
      if (src < 0) continue;
      out.image.set(r, c, left.pixel(r, src));
      out.hole_mask(r, c) = false;
      out.source_disparity(r, c) = disp.values(r, src);
    }
  }
  return out;
}

RgbImage inpaint_holes(const RgbImage& image, const Mask& holes, int iterations) {
  if (holes.rows() != image.height || holes.cols() != image.width) {
    throw Error(ErrorCode::Dimension, "inpaint: mask and image sizes differ");
  }
  if (!holes.any()) return image;
  if (holes.all()) throw Error(ErrorCode::AllHoles, "inpaint: the entire image is holes");
  RgbImage out = image;
  const Mask known = !holes;
  for (int ch = 0; ch < 3; ++ch) {
    Grid<float> plane(image.height, image.width);
    for (int r = 0; r < image.height; ++r) {
      for (int c = 0; c < image.width; ++c) plane(r, c) = image.at(r, c)[ch];
    }
    diffuse_fill(plane, holes, known, iterations, 1e-3);
    for (int r = 0; r < image.height; ++r) {
      for (int c = 0; c < image.width; ++c) {
        if (holes(r, c)) out.at(r, c)[ch] = static_cast<std::uint8_t>(std::clamp(std::lround(plane(r, c)), 0L, 255L));
      }
    }
  }
  return out;
}

}  // namespace illusion_forge
