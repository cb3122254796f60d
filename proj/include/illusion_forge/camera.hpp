#pragma once

#include "illusion_forge/error.hpp"
#include "illusion_forge/grid.hpp"

#include <Eigen/Core>

#include <utility>

namespace illusion_forge {

/// Pinhole intrinsics of a distortion-free, rectified camera.
template <typename Scalar>
struct Intrinsics {
  Scalar fx{1}, fy{1}, cx{0}, cy{0};
  int width = 0;
  int height = 0;

  Eigen::Matrix<Scalar, 3, 3> matrix() const {
    Eigen::Matrix<Scalar, 3, 3> k;
    k << fx, 0, cx, 0, fy, cy, 0, 0, 1;
    return k;
  }

  Intrinsics scaled(int factor) const {
    const Scalar s = static_cast<Scalar>(factor);
    return {fx * s, fy * s, cx * s, cy * s, width * factor, height * factor};
  }

  bool contains(int col, int row) const {
    return col >= 0 && row >= 0 && col < width && row < height;
  }

  bool operator==(const Intrinsics&) const = default;
};

using Intrinsicsd = Intrinsics<double>;

template <typename Scalar>
using Point3 = Eigen::Matrix<Scalar, 3, 1>;

/// Real-valued image coordinates with the depth that produced them.
template <typename Scalar>
struct PixelSample {
  Scalar u{0}, v{0}, z{0};
};

/// Two-camera rig: `R`, `T` map lidar-frame points into the left stereo
/// camera frame; `baseline_m` and `focal_px` are the stereo pair's.
struct CalibrationRig {
  Intrinsicsd left_intrinsics;
  Intrinsicsd lidar_intrinsics;
  Eigen::Matrix3d R = Eigen::Matrix3d::Identity();
  Eigen::Vector3d T = Eigen::Vector3d::Zero();
  double baseline_m = 0.0;
  double focal_px = 0.0;
};

/// Throws unless R is orthonormal (max-abs of RᵀR − I within `tol`) and all
/// focal lengths, the baseline and the stereo focal are positive.
void validate_rig(const CalibrationRig& rig, double tol = 1e-6);

template <typename Scalar>
Point3<Scalar> unproject(const PixelSample<Scalar>& pix, const Intrinsics<Scalar>& k) {
  if (!(pix.z > Scalar(0))) {
    throw Error(ErrorCode::NonPositiveDepth, "unproject: depth must be positive");
  }
  return {pix.z * (pix.u - k.cx) / k.fx, pix.z * (pix.v - k.cy) / k.fy, pix.z};
}

template <typename Derived, typename DerivedR, typename DerivedT>
auto transform(const Eigen::MatrixBase<Derived>& p, const Eigen::MatrixBase<DerivedR>& r,
               const Eigen::MatrixBase<DerivedT>& t) {
  return (r * p + t).eval();
}

template <typename Scalar>
PixelSample<Scalar> project(const Point3<Scalar>& p, const Intrinsics<Scalar>& k) {
  if (!(p.z() > Scalar(0))) {
    throw Error(ErrorCode::BehindCamera, "project: point is behind the camera");
  }
  return {k.fx * p.x() / p.z() + k.cx, k.fy * p.y() / p.z() + k.cy, p.z()};
}

/// Disparity-space coordinates (u, v, d) of a camera-frame point, using the
/// averaged focal (fx + fy) / 2 for the disparity axis.
template <typename Scalar>
Point3<Scalar> to_disparity_space(const Point3<Scalar>& p, const Intrinsics<Scalar>& k,
                                  Scalar baseline) {
  const Scalar f = (k.fx + k.fy) / Scalar(2);
  return {k.fx * p.x() / p.z() + k.cx, k.fy * p.y() / p.z() + k.cy, baseline * f / p.z()};
}

DisparityMap depth_to_disparity(const DepthMap& depth, double baseline_m, double focal_px);
DepthMap disparity_to_depth(const DisparityMap& disp, double baseline_m, double focal_px);

/// Nearest-neighbour upsampling by an integer factor; returns the intrinsics
/// scaled by the same factor.
std::pair<DepthMap, Intrinsicsd> upsample_depth_nearest(const DepthMap& depth,
                                                        const Intrinsicsd& k, int factor);

}  // namespace illusion_forge
