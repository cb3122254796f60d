#pragma once

// On-disk fixture frames for the CLI and service tests.

#include "illusion_forge/io.hpp"
#include "illusion_forge/raster.hpp"

#include <Eigen/Core>

#include <cmath>
#include <random>
#include <string>

namespace fixture {

using namespace illusion_forge;

constexpr int kWidth = 64;
constexpr int kHeight = 48;

/// Support polygon covers a wide box, the illusion a smaller box inside it.
inline Polygon support_polygon() { return {{8, 6}, {56, 6}, {56, 42}, {8, 42}}; }
inline Polygon illusion_polygon() { return {{20, 16}, {44, 16}, {44, 32}, {20, 32}}; }

inline double plane_disparity(int u, int v) { return 0.05 * u + 0.02 * v + 8.0; }

inline DisparityMap frame_disparity() {
  Grid<float> g(kHeight, kWidth);
  const Mask ill = rasterize_polygon(illusion_polygon(), kHeight, kWidth);
  for (int v = 0; v < kHeight; ++v) {
    for (int u = 0; u < kWidth; ++u) {
      g(v, u) = static_cast<float>(plane_disparity(u, v));
      if (ill(v, u)) g(v, u) = static_cast<float>(14.0 + 3.0 * std::sin(0.4 * u) * std::cos(0.3 * v));
    }
  }
  return DisparityMap::from_values(g);
}

inline RgbImage frame_image() {
  RgbImage img(kWidth, kHeight);
  for (int v = 0; v < kHeight; ++v)
    for (int u = 0; u < kWidth; ++u)
      img.set(v, u, {std::uint8_t(4 * u), std::uint8_t(5 * v), std::uint8_t((u * v) % 256)});
  return img;
}

inline RegionSet frame_regions() {
  RegionSet rs;
  rs.labels = Grid<std::uint8_t>::Zero(kHeight, kWidth);
  rs.labels = rasterize_polygon(support_polygon(), kHeight, kWidth).select(std::uint8_t{2}, rs.labels);
  rs.labels = rasterize_polygon(illusion_polygon(), kHeight, kWidth).select(std::uint8_t{1}, rs.labels);
  rs.pairs = {{1, 2}};
  return rs;
}

/// `<root>/<id>/{left.png, disparity.pfm}` plus `labels.png` / `pairs.json`
/// when `with_regions`.
inline fs::path write_frame(const fs::path& root, const std::string& id, bool with_regions = true) {
  const fs::path dir = root / id;
  fs::create_directories(dir);
  write_rgb_png(frame_image(), dir / "left.png");
  write_pfm(frame_disparity(), dir / "disparity.pfm");
  if (with_regions) {
    const RegionSet rs = frame_regions();
    write_gray8_png(rs.labels, dir / "labels.png");
    write_file_atomic(dir / "pairs.json", pairs_to_json(rs.pairs));
  }
  return dir;
}

struct NoisyPlane {
  Eigen::MatrixX3d pts;
  Eigen::Vector4d truth;  // a·u + b·v + c·d + g = 0, unit normal, a > 0
};

/// 200 points on d = 0.1u + 0.2v + 3 with σ = 0.05 noise, then 50 uniform
/// outliers in [0, 50]³.
inline NoisyPlane noisy_plane(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uv(0.0, 50.0);
  std::normal_distribution<double> noise(0.0, 0.05);
  NoisyPlane f;
  f.pts.resize(250, 3);
  for (int i = 0; i < 200; ++i) {
    const double u = uv(rng), v = uv(rng);
    f.pts.row(i) << u, v, 0.1 * u + 0.2 * v + 3.0 + noise(rng);
  }
  for (int i = 200; i < 250; ++i) f.pts.row(i) << uv(rng), uv(rng), uv(rng);
  f.truth = Eigen::Vector4d(0.1, 0.2, -1.0, 3.0) / Eigen::Vector3d(0.1, 0.2, -1.0).norm();
  return f;
}

}  // namespace fixture
