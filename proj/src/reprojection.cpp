#include "illusion_forge/reprojection.hpp"
#include "illusion_forge/error.hpp"
#include "illusion_forge/image_ops.hpp"
#include "illusion_forge/parallel.hpp"

#include <Eigen/LU>

#include <algorithm>
#include <cmath>

namespace illusion_forge {

void ReprojectConfig::validate() const {
  if (upsample_factor < 1) throw Error(ErrorCode::Validation, "reproject: upsample factor must be >= 1");
  if (small_area_th < 1) throw Error(ErrorCode::Validation, "reproject: area threshold must be positive");
  if (guided_radius < 1) throw Error(ErrorCode::Validation, "reproject: guided radius must be positive");
  if (!(guided_eps > 0.0)) throw Error(ErrorCode::Validation, "reproject: guided eps must be positive");
  if (!(backward_tau > 0.0)) throw Error(ErrorCode::Validation, "reproject: tau must be positive");
  if (!(noise_tau > 0.0)) throw Error(ErrorCode::Validation, "reproject: noise tau must be positive");
  if (median_size < 1) throw Error(ErrorCode::Validation, "reproject: median size must be positive");
  if (fill_iterations < 0) throw Error(ErrorCode::Validation, "reproject: fill iterations must be >= 0");
}

DepthMap zbuffer_splat(const std::vector<PixelSample<double>>& samples, int width, int height) {
  Grid<float> z = Grid<float>::Zero(height, width);
  for (const auto& s : samples) {
    if (!(s.z > 0.0) || !std::isfinite(s.u) || !std::isfinite(s.v) || !std::isfinite(s.z)) continue;
    const double u0 = std::floor(s.u), u1 = std::ceil(s.u);
    const double v0 = std::floor(s.v), v1 = std::ceil(s.v);
    const float zf = static_cast<float>(s.z);
    for (double u : {u0, u1}) {
      if (u < 0.0 || u >= width) continue;
      for (double v : {v0, v1}) {
        if (v < 0.0 || v >= height) continue;
        float& cell = z(static_cast<Eigen::Index>(v), static_cast<Eigen::Index>(u));
        if (cell == 0.0f || zf < cell) cell = zf;
      }
    }
  }
  return DepthMap(std::move(z));
}

DepthMap fill_holes(const DepthMap& depth, const RgbImage& guide, const ReprojectConfig& cfg) {
  if (guide.width != depth.width() || guide.height != depth.height()) {
    throw Error(ErrorCode::Dimension, "fill_holes: guide and depth sizes differ");
  }
  const Mask valid = depth.valid();
  const Mask invalid = !valid;
  if (!invalid.any()) return depth;

  const Components comps = connected_components(invalid);
  Mask small = Mask::Constant(invalid.rows(), invalid.cols(), false);
  for (Eigen::Index i = 0; i < small.size(); ++i) {
    const int label = comps.labels.data()[i];
    small.data()[i] = label > 0 && comps.areas[label - 1] <= cfg.small_area_th;
  }
  if (!small.any()) return depth;

  Grid<float> repair_small = depth.values;
  const Mask small_filled = diffuse_fill(repair_small, small, valid, cfg.fill_iterations);
  Grid<float> repair_all = depth.values;
  diffuse_fill(repair_all, invalid, valid, cfg.fill_iterations);
  const Grid<float> smoothed = guided_filter(guide, repair_all, cfg.guided_radius, cfg.guided_eps);

  DepthMap out = depth;
  for (Eigen::Index i = 0; i < small.size(); ++i) {
    if (small_filled.data()[i] && repair_small.data()[i] != 0.0f) {
      out.values.data()[i] = std::max(smoothed.data()[i], 0.0f);
    }
  }
  return out;
}

DepthMap backward_validate(const DepthMap& zed_depth, const DepthMap& lidar_depth, const CalibrationRig& rig,
                           double tau) {
  validate_rig(rig);
  const Intrinsicsd& kz = rig.left_intrinsics;
  const Intrinsicsd& kl = rig.lidar_intrinsics;
  if (zed_depth.width() != kz.width || zed_depth.height() != kz.height) {
    throw Error(ErrorCode::Dimension, "backward_validate: left depth does not match left intrinsics");
  }
  if (lidar_depth.width() != kl.width || lidar_depth.height() != kl.height) {
    throw Error(ErrorCode::Dimension, "backward_validate: lidar depth does not match lidar intrinsics");
  }
  const Eigen::Matrix3d r_inv = rig.R.inverse();
  DepthMap out = zed_depth;
  for (int v = 0; v < zed_depth.height(); ++v) {
    for (int u = 0; u < zed_depth.width(); ++u) {
      const float z = zed_depth.values(v, u);
      if (!(z > 0.0f)) continue;
      const Point3<double> pz = unproject(PixelSample<double>{double(u), double(v), double(z)}, kz);
      const Point3<double> pl = r_inv * (pz - rig.T);
      bool keep = false;
      if (pl.z() > 0.0) {
        const PixelSample<double> q = project(pl, kl);
        const double cu = std::round(q.u), cv = std::round(q.v);
        if (cu >= 0.0 && cv >= 0.0 && cu < kl.width && cv < kl.height) {
          const float zl = lidar_depth.values(static_cast<Eigen::Index>(cv), static_cast<Eigen::Index>(cu));
          keep = zl > 0.0f && std::abs(q.z - zl) <= tau;
        }
      }
      if (!keep) out.values(v, u) = 0.0f;
    }
  }
  return out;
}

Grid<float> masked_median(const DepthMap& depth, int size) {
  const int h = depth.height(), w = depth.width();
  const int lo = (size - 1) / 2, hi = size / 2;
  Grid<float> med = Grid<float>::Zero(h, w);
  parallel_for(static_cast<std::size_t>(h), default_thread_count(), [&](std::size_t begin, std::size_t end) {
    std::vector<float> window;
    window.reserve(static_cast<std::size_t>(size) * size);
    for (int r = static_cast<int>(begin); r < static_cast<int>(end); ++r) {
      for (int c = 0; c < w; ++c) {
        if (!(depth.values(r, c) > 0.0f)) continue;
        window.clear();
        for (int rr = std::max(0, r - lo); rr <= std::min(h - 1, r + hi); ++rr) {
          for (int cc = std::max(0, c - lo); cc <= std::min(w - 1, c + hi); ++cc) {
            const float v = depth.values(rr, cc);
            if (v > 0.0f) window.push_back(v);
          }
        }
        const std::size_t n = window.size();
        auto mid = window.begin() + static_cast<std::ptrdiff_t>(n / 2);
        std::nth_element(window.begin(), mid, window.end());
        double m = *mid;
        if (n % 2 == 0) m = 0.5 * (m + *std::max_element(window.begin(), mid));
        med(r, c) = static_cast<float>(m);
      }
    }
  });
  return med;
}

DepthMap suppress_noise(const DepthMap& depth, const ReprojectConfig& cfg) {
  const Grid<float> med = masked_median(depth, cfg.median_size);
  DepthMap out = depth;
  for (Eigen::Index i = 0; i < out.values.size(); ++i) {
    const float v = depth.values.data()[i];
    if (v > 0.0f && std::abs(static_cast<double>(v) - med.data()[i]) > cfg.noise_tau) out.values.data()[i] = 0.0f;
  }
  return out;
}

std::vector<PixelSample<double>> lidar_to_left_samples(const DepthMap& lidar_depth, const CalibrationRig& rig,
                                                       int upsample_factor) {
  const auto [dense, k_up] = upsample_depth_nearest(lidar_depth, rig.lidar_intrinsics, upsample_factor);
  std::vector<PixelSample<double>> samples;
  samples.reserve(static_cast<std::size_t>(dense.values.size()));
  for (int v = 0; v < dense.height(); ++v) {
    for (int u = 0; u < dense.width(); ++u) {
      const float z = dense.values(v, u);
      if (!(z > 0.0f) || !std::isfinite(z)) continue;
      const Point3<double> pl = unproject(PixelSample<double>{double(u), double(v), double(z)}, k_up);
      const Point3<double> pz = transform(pl, rig.R, rig.T);
      if (!(pz.z() > 0.0)) continue;
      samples.push_back(project(pz, rig.left_intrinsics));
    }
  }
  return samples;
}

DepthMap reproject_to_depth(const DepthMap& lidar_depth, const RgbImage& left_rgb, const CalibrationRig& rig,
                            const ReprojectConfig& cfg) {
  cfg.validate();
  validate_rig(rig);
  const Intrinsicsd& kz = rig.left_intrinsics;
  if (left_rgb.width != kz.width || left_rgb.height != kz.height) {
    throw Error(ErrorCode::Dimension, "reproject: guide image does not match left intrinsics");
  }
  const auto samples = lidar_to_left_samples(lidar_depth, rig, cfg.upsample_factor);
  DepthMap depth = zbuffer_splat(samples, kz.width, kz.height);
  depth = fill_holes(depth, left_rgb, cfg);
  depth = backward_validate(depth, lidar_depth, rig, cfg.backward_tau);
  return suppress_noise(depth, cfg);
}

DisparityMap reproject_depth(const DepthMap& lidar_depth, const RgbImage& left_rgb, const CalibrationRig& rig,
                             const ReprojectConfig& cfg) {
  return depth_to_disparity(reproject_to_depth(lidar_depth, left_rgb, rig, cfg), rig.baseline_m, rig.focal_px);
}

}  // namespace illusion_forge
