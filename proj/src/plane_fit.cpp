#include "illusion_forge/plane_fit.hpp"
#include "illusion_forge/parallel.hpp"

#include <Eigen/Geometry>
#include <Eigen/SVD>
#include <json.hpp>

#include <array>
#include <random>

namespace illusion_forge {

namespace {

constexpr double kDegenerateCross = 1e-9;

// Unbiased draw from [0, n).
std::size_t draw_index(std::mt19937_64& rng, std::size_t n) {
  const std::uint64_t bound = n;
  const std::uint64_t limit = (0 - bound) % bound;  // 2^64 mod n
  for (;;) {
    const std::uint64_t x = rng();
    if (x >= limit) return static_cast<std::size_t>(x % bound);
  }
}

std::array<std::size_t, 3> draw_triple(std::mt19937_64& rng, std::size_t n) {
  const std::size_t a = draw_index(rng, n);
  std::size_t b = draw_index(rng, n - 1);
  if (b >= a) ++b;
  std::size_t lo = std::min(a, b), hi = std::max(a, b);
  std::size_t c = draw_index(rng, n - 2);
  if (c >= lo) ++c;
  if (c >= hi) ++c;
  return {a, b, c};
}

// Candidate from three points: normal = (p1 - p0) × (p2 - p0), offset from p1.
bool candidate_plane(const PointSet& pts, const std::array<std::size_t, 3>& idx, double min_delta,
                     PlaneParams& out) {
  const Eigen::Vector3d p0 = pts.row(idx[0]).transpose();
  const Eigen::Vector3d p1 = pts.row(idx[1]).transpose();
  const Eigen::Vector3d p2 = pts.row(idx[2]).transpose();
  const Eigen::Vector3d n = (p1 - p0).cross(p2 - p0);
  const double norm = n.norm();
  if (!(norm >= kDegenerateCross)) return false;
  if (std::abs(n.z()) / norm < min_delta) return false;
  out = PlaneParams(n.x(), n.y(), n.z(), -n.dot(p1));
  return true;
}

std::size_t count_inliers(const PlaneParams& plane, const PointSet& pts, double tau) {
  const Eigen::Vector3d n = plane.normal();
  const double inv = 1.0 / n.norm();
  std::size_t count = 0;
  for (Eigen::Index i = 0; i < pts.rows(); ++i) {
    if (std::abs(pts.row(i).dot(n) + plane.gamma()) * inv < tau) ++count;
  }
  return count;
}

}  // namespace

void RansacConfig::validate() const {
  if (!(inlier_threshold > 0.0)) throw Error(ErrorCode::Validation, "ransac: inlier threshold must be positive");
  if (batch_size < 1) throw Error(ErrorCode::Validation, "ransac: batch size must be >= 1");
  if (max_iterations < 1) throw Error(ErrorCode::Validation, "ransac: max iterations must be >= 1");
  if (!(min_delta >= 0.0)) throw Error(ErrorCode::Validation, "ransac: min_delta must be non-negative");
}

PlaneFitResult fit_plane_ransac(const PointSet& points, const RansacConfig& cfg,
                                std::vector<RansacCandidate>* trace) {
  cfg.validate();
  const std::size_t n = static_cast<std::size_t>(points.rows());
  if (n < 3) {
    throw Error(ErrorCode::TooFewPoints, "degenerate support region: fewer than 3 points");
  }
  if (!points.allFinite()) throw Error(ErrorCode::NonFinite, "ransac: non-finite point");

  const int threads = resolve_thread_count(cfg.threads);
  std::mt19937_64 rng(cfg.seed);
  const std::size_t batch = static_cast<std::size_t>(cfg.batch_size);

  std::vector<PlaneParams> planes(batch);
  std::vector<char> usable(batch);
  std::vector<std::size_t> counts(batch);

  std::size_t best_score = 0;
  PlaneParams best_plane;
  bool any_candidate = false;

  for (int it = 0; it < cfg.max_iterations; ++it) {
    for (std::size_t b = 0; b < batch; ++b) {
      usable[b] = candidate_plane(points, draw_triple(rng, n), cfg.min_delta, planes[b]);
    }
    parallel_for(batch, threads, [&](std::size_t begin, std::size_t end) {
      for (std::size_t b = begin; b < end; ++b) {
        counts[b] = usable[b] ? count_inliers(planes[b], points, cfg.inlier_threshold) : 0;
      }
    });
    // argmax with lowest-index tie-break, independent of scheduling
    std::size_t k = batch;
    for (std::size_t b = 0; b < batch; ++b) {
      if (!usable[b]) continue;
      any_candidate = true;
      if (trace) trace->push_back({planes[b], counts[b]});
      if (k == batch || counts[b] > counts[k]) k = b;
    }
    if (k != batch && counts[k] > best_score) {
      best_score = counts[k];
      best_plane = planes[k];
    }
  }
  if (!any_candidate || best_score < 3) {
    throw Error(ErrorCode::DegenerateSupport,
                "degenerate support region: every sampled triple was collinear or parallel to the disparity axis");
  }

  PlaneFitResult result;
  result.inlier_mask.assign(n, false);
  PointSet inliers(best_score, 3);
  {
    const Eigen::Vector3d nrm = best_plane.normal();
    const double inv = 1.0 / nrm.norm();
    Eigen::Index row = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (std::abs(points.row(i).dot(nrm) + best_plane.gamma()) * inv < cfg.inlier_threshold) {
        result.inlier_mask[i] = true;
        inliers.row(row++) = points.row(i);
      }
    }
  }
  result.inlier_count = best_score;
  result.plane = refine_plane_eigen(inliers);
  result.rms_residual = std::sqrt(residual_sum_squares(result.plane, inliers) / static_cast<double>(best_score));
  return result;
}

PlaneParams refine_plane_eigen(const PointSet& inliers) {
  if (inliers.rows() < 3) {
    throw Error(ErrorCode::RankDeficient, "degenerate support region: plane refinement needs >= 3 points");
  }
  Eigen::Matrix<double, Eigen::Dynamic, 4> a(inliers.rows(), 4);
  a.leftCols<3>() = inliers;
  a.col(3).setOnes();
  // The right singular vectors of [P, 1] are the eigenvectors of
  // S = [P, 1]ᵀ[P, 1]; the smallest singular value's vector is S's
  // smallest-eigenvalue eigenvector without squaring the conditioning.
  Eigen::JacobiSVD<Eigen::Matrix<double, Eigen::Dynamic, 4>> svd(a, Eigen::ComputeThinV);
  const auto& sv = svd.singularValues();
  if (!(sv[2] > 1e-12 * sv[0])) {
    throw Error(ErrorCode::RankDeficient, "degenerate support region: points are collinear");
  }
  PlaneParams plane(Eigen::Vector4d(svd.matrixV().col(3)));
  if (!(plane.normal().norm() > 1e-15)) {
    throw Error(ErrorCode::RankDeficient, "degenerate support region: refined normal vanished");
  }
  return plane.normalized();
}

double residual_sum_squares(const PlaneParams& plane, const PointSet& points) {
  const Eigen::Vector3d n = plane.normal();
  const double inv2 = 1.0 / n.squaredNorm();
  double s = 0.0;
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    const double r = points.row(i).dot(n) + plane.gamma();
    s += r * r * inv2;
  }
  return s;
}

std::string plane_json(const PlaneFitResult& fit) {
  const nlohmann::json j = {{"alpha", fit.plane.alpha()}, {"beta", fit.plane.beta()},
                            {"delta", fit.plane.delta()}, {"gamma", fit.plane.gamma()},
                            {"inliers", fit.inlier_count}, {"rms", fit.rms_residual}};
  return j.dump();
}

}  // namespace illusion_forge
