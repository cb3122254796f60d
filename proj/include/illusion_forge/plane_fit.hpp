#pragma once

#include "illusion_forge/error.hpp"

#include <Eigen/Core>

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

namespace illusion_forge {

/// Plane α·u + β·v + δ·d + γ = 0 in disparity space, stored as
/// (α, β, δ, γ) with α² + β² + δ² = 1 once normalized.
template <typename Scalar>
struct Plane {
  Eigen::Matrix<Scalar, 4, 1> coeffs = Eigen::Matrix<Scalar, 4, 1>::Zero();

  Plane() = default;
  explicit Plane(const Eigen::Matrix<Scalar, 4, 1>& c) : coeffs(c) {}
  Plane(Scalar a, Scalar b, Scalar d, Scalar g) : coeffs(a, b, d, g) {}

  Scalar alpha() const { return coeffs[0]; }
  Scalar beta() const { return coeffs[1]; }
  Scalar delta() const { return coeffs[2]; }
  Scalar gamma() const { return coeffs[3]; }
  auto normal() const { return coeffs.template head<3>(); }

  /// Rescales so the normal is unit length and the first of (α, β, δ) whose
  /// magnitude exceeds `zero_tol` is positive.
  Plane normalized(Scalar zero_tol = Scalar(1e-9)) const {
    Plane p(coeffs / normal().norm());
    for (int i = 0; i < 3; ++i) {
      if (std::abs(p.coeffs[i]) > zero_tol) {
        if (p.coeffs[i] < Scalar(0)) p.coeffs = -p.coeffs;
        break;
      }
    }
    return p;
  }
};

using PlaneParams = Plane<double>;

/// Signed residual α·u + β·v + δ·d + γ divided by the normal's length.
template <typename Scalar, typename Derived>
Scalar point_plane_distance(const Plane<Scalar>& plane, const Eigen::MatrixBase<Derived>& point) {
  return std::abs(plane.normal().dot(point.template cast<Scalar>()) + plane.gamma()) / plane.normal().norm();
}

/// Solves the plane for d at (u, v).
template <typename Scalar>
Scalar plane_disparity_at(const Plane<Scalar>& plane, Scalar u, Scalar v, Scalar min_delta = Scalar(1e-6)) {
  if (!(std::abs(plane.delta()) >= min_delta)) {
    throw Error(ErrorCode::DeltaDegenerate,
                "degenerate support region: plane is parallel to the disparity axis");
  }
  return -(plane.alpha() * u + plane.beta() * v + plane.gamma()) / plane.delta();
}

/// N×3 rows of (u, v, d).
using PointSet = Eigen::Matrix<double, Eigen::Dynamic, 3>;

struct RansacConfig {
  double inlier_threshold = 1.0;  ///< τ_d, disparity pixels
  int batch_size = 64;            ///< candidate triples per iteration
  int max_iterations = 100;
  std::uint64_t seed = 0;
  double min_delta = 1e-6;
  int threads = 0;  ///< 0: ILLUSION_FORGE_THREADS / hardware

  void validate() const;
};

struct PlaneFitResult {
  PlaneParams plane;
  std::vector<bool> inlier_mask;  ///< against the winning candidate
  std::size_t inlier_count = 0;
  double rms_residual = 0.0;  ///< refined plane over the inliers
};

/// Record of one evaluated candidate, for diagnostics and tests.
struct RansacCandidate {
  PlaneParams plane;  ///< unnormalized (n, -n·p1)
  std::size_t inliers = 0;
};

/// Multi-candidate RANSAC: every iteration samples `batch_size` triples,
/// scores each candidate by inlier count, and the best candidate's inliers
/// feed `refine_plane_eigen`. Deterministic for a given seed regardless of
/// the thread count. If `trace` is non-null every non-degenerate candidate is
/// appended to it in sampling order.
PlaneFitResult fit_plane_ransac(const PointSet& points, const RansacConfig& cfg,
                                std::vector<RansacCandidate>* trace = nullptr);

/// Eigenvector of the smallest eigenvalue of [P, 1]ᵀ[P, 1], rescaled to a
/// unit normal and sign-canonicalized.
PlaneParams refine_plane_eigen(const PointSet& inliers);

/// Sum of squared point-plane distances.
double residual_sum_squares(const PlaneParams& plane, const PointSet& points);

std::string plane_json(const PlaneFitResult& fit);

}  // namespace illusion_forge
