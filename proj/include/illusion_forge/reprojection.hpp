#pragma once

#include "illusion_forge/camera.hpp"
#include "illusion_forge/grid.hpp"

#include <vector>

namespace illusion_forge {

struct ReprojectConfig {
  int upsample_factor = 3;
  int small_area_th = 100;  ///< pixels; invalid components up to this size are filled
  int guided_radius = 5;
  double guided_eps = 1e-3;
  double backward_tau = 0.05;  ///< meters
  double noise_tau = 0.03;     ///< meters
  int median_size = 3;
  int fill_iterations = 64;

  void validate() const;
};

/// Splats every sample with z > 0 onto the four integer neighbours of
/// (u, v); each pixel keeps the minimum depth.
DepthMap zbuffer_splat(const std::vector<PixelSample<double>>& samples, int width, int height);

/// Small invalid components (area ≤ small_area_th) receive the guided-filtered
/// value of a whole-mask diffusion fill; larger holes stay invalid.
DepthMap fill_holes(const DepthMap& depth, const RgbImage& guide, const ReprojectConfig& cfg);

/// Zeroes left-camera depths that do not reproject consistently into the
/// lidar depth map (out of bounds, lidar 0, or depth gap above `tau`).
/// Surviving pixels keep their value.
DepthMap backward_validate(const DepthMap& zed_depth, const DepthMap& lidar_depth, const CalibrationRig& rig,
                           double tau);

/// Median of the valid values in the median_size² window around each valid
/// pixel (mean of the two middle values for even counts).
Grid<float> masked_median(const DepthMap& depth, int size);

/// Zeroes pixels deviating from their masked median by more than noise_tau.
DepthMap suppress_noise(const DepthMap& depth, const ReprojectConfig& cfg);

/// Lidar samples moved into the left camera image: upsample, unproject,
/// rigid transform, project. Points behind the camera are dropped.
std::vector<PixelSample<double>> lidar_to_left_samples(const DepthMap& lidar_depth, const CalibrationRig& rig,
                                                       int upsample_factor);

/// Left-camera depth after every stage but the disparity conversion.
DepthMap reproject_to_depth(const DepthMap& lidar_depth, const RgbImage& left_rgb, const CalibrationRig& rig,
                            const ReprojectConfig& cfg);

DisparityMap reproject_depth(const DepthMap& lidar_depth, const RgbImage& left_rgb, const CalibrationRig& rig,
                             const ReprojectConfig& cfg);

}  // namespace illusion_forge
