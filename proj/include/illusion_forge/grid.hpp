#pragma once

#include <Eigen/Core>

#include <array>
#include <cstdint>
#include <span>
#include <vector>

namespace illusion_forge {

/// Row-major 2-D grid; row index is image v, column index is image u.
template <typename Scalar>
using Grid = Eigen::Array<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

using Mask = Grid<bool>;

/// Per-pixel horizontal disparity in pixels. Invalid pixels hold 0 and have
/// `valid` cleared.
struct DisparityMap {
  Grid<float> values;
  Mask valid;

  DisparityMap() = default;
  DisparityMap(Grid<float> v, Mask m) : values(std::move(v)), valid(std::move(m)) {}

  /// Builds a map where every positive finite value is valid and everything
  /// else becomes the invalid sentinel.
  static DisparityMap from_values(const Grid<float>& raw);

  static DisparityMap invalid(int height, int width) {
    return {Grid<float>::Zero(height, width), Mask::Constant(height, width, false)};
  }

  int width() const { return static_cast<int>(values.cols()); }
  int height() const { return static_cast<int>(values.rows()); }
  float max_valid() const;
};

/// Metric depth in meters; 0 marks an invalid pixel.
struct DepthMap {
  Grid<float> values;

  DepthMap() = default;
  explicit DepthMap(Grid<float> v) : values(std::move(v)) {}

  int width() const { return static_cast<int>(values.cols()); }
  int height() const { return static_cast<int>(values.rows()); }
  bool is_valid(int row, int col) const { return values(row, col) > 0.0f; }
  Mask valid() const { return values > 0.0f; }
};

/// Values in [0, 1]. `valid` marks pixels that carry a value (all true for
/// predicted confidence, may be partial for derived ground truth).
struct ConfidenceMap {
  Grid<float> values;
  Mask valid;

  ConfidenceMap() = default;
  ConfidenceMap(Grid<float> v, Mask m) : values(std::move(v)), valid(std::move(m)) {}
  static ConfidenceMap dense(Grid<float> v) {
    Mask m = Mask::Constant(v.rows(), v.cols(), true);
    return {std::move(v), std::move(m)};
  }

  int width() const { return static_cast<int>(values.cols()); }
  int height() const { return static_cast<int>(values.rows()); }
};

/// 8-bit RGB, interleaved, row-major.
struct RgbImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> samples;

  RgbImage() = default;
  RgbImage(int w, int h) : width(w), height(h), samples(static_cast<std::size_t>(w) * h * 3, 0) {}

  std::span<std::uint8_t, 3> at(int row, int col) {
    return std::span<std::uint8_t, 3>(samples.data() + (static_cast<std::size_t>(row) * width + col) * 3, 3);
  }
  std::span<const std::uint8_t, 3> at(int row, int col) const {
    return std::span<const std::uint8_t, 3>(samples.data() + (static_cast<std::size_t>(row) * width + col) * 3, 3);
  }
  std::array<std::uint8_t, 3> pixel(int row, int col) const {
    auto p = at(row, col);
    return {p[0], p[1], p[2]};
  }
  void set(int row, int col, const std::array<std::uint8_t, 3>& rgb) {
    auto p = at(row, col);
    p[0] = rgb[0];
    p[1] = rgb[1];
    p[2] = rgb[2];
  }
  bool operator==(const RgbImage&) const = default;
};

}  // namespace illusion_forge
