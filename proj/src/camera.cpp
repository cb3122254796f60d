#include "illusion_forge/camera.hpp"

#include <cmath>

namespace illusion_forge {

void validate_rig(const CalibrationRig& rig, double tol) {
  const double dev = (rig.R.transpose() * rig.R - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff();
  if (!(dev <= tol)) {
    throw Error(ErrorCode::NotOrthonormal,
                "calibration: R is not orthonormal (max |R^T R - I| = " + std::to_string(dev) + ")");
  }
  if (!rig.R.allFinite() || !rig.T.allFinite()) {
    throw Error(ErrorCode::Validation, "calibration: R and T must be finite");
  }
  for (const auto* k : {&rig.left_intrinsics, &rig.lidar_intrinsics}) {
    if (!(k->fx > 0.0) || !(k->fy > 0.0)) {
      throw Error(ErrorCode::Validation, "calibration: fx and fy must be positive");
    }
    if (k->width <= 0 || k->height <= 0) {
      throw Error(ErrorCode::Validation, "calibration: image size must be positive");
    }
  }
  if (!(rig.baseline_m > 0.0)) throw Error(ErrorCode::Validation, "calibration: baseline_m must be positive");
  if (!(rig.focal_px > 0.0)) throw Error(ErrorCode::Validation, "calibration: focal_px must be positive");
}

namespace {
void check_stereo(double baseline_m, double focal_px) {
  if (!(baseline_m > 0.0) || !(focal_px > 0.0)) {
    throw Error(ErrorCode::Validation, "baseline and focal length must be positive");
  }
}
}  // namespace

DisparityMap depth_to_disparity(const DepthMap& depth, double baseline_m, double focal_px) {
  check_stereo(baseline_m, focal_px);
  const double bf = baseline_m * focal_px;
  DisparityMap out = DisparityMap::invalid(depth.height(), depth.width());
  for (Eigen::Index r = 0; r < depth.values.rows(); ++r) {
    for (Eigen::Index c = 0; c < depth.values.cols(); ++c) {
      const float z = depth.values(r, c);
      if (z > 0.0f && std::isfinite(z)) {
        out.values(r, c) = static_cast<float>(bf / z);
        out.valid(r, c) = true;
      }
    }
  }
  return out;
}

DepthMap disparity_to_depth(const DisparityMap& disp, double baseline_m, double focal_px) {
  check_stereo(baseline_m, focal_px);
  const double bf = baseline_m * focal_px;
  Grid<float> z = Grid<float>::Zero(disp.height(), disp.width());
  for (Eigen::Index r = 0; r < z.rows(); ++r) {
    for (Eigen::Index c = 0; c < z.cols(); ++c) {
      if (!disp.valid(r, c)) continue;
      const float d = disp.values(r, c);
      if (d < 0.0f) throw Error(ErrorCode::Validation, "disparity_to_depth: negative disparity");
      if (d > 0.0f) z(r, c) = static_cast<float>(bf / d);
    }
  }
  return DepthMap(std::move(z));
}

std::pair<DepthMap, Intrinsicsd> upsample_depth_nearest(const DepthMap& depth, const Intrinsicsd& k,
                                                        int factor) {
  if (factor < 1) throw Error(ErrorCode::Validation, "upsample factor must be >= 1");
  const Eigen::Index h = depth.values.rows() * factor;
  const Eigen::Index w = depth.values.cols() * factor;
  Grid<float> up(h, w);
  for (Eigen::Index r = 0; r < h; ++r) {
    for (Eigen::Index c = 0; c < w; ++c) up(r, c) = depth.values(r / factor, c / factor);
  }
  return {DepthMap(std::move(up)), k.scaled(factor)};
}

}  // namespace illusion_forge
