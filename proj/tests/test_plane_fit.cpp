#include "illusion_forge/plane_fit.hpp"

#include "fixtures.hpp"
#include "oracles.hpp"

#include <doctest.h>

using namespace illusion_forge;

namespace {

PointSet points(std::initializer_list<std::array<double, 3>> rows) {
  PointSet p(static_cast<Eigen::Index>(rows.size()), 3);
  Eigen::Index i = 0;
  for (const auto& r : rows) p.row(i++) << r[0], r[1], r[2];
  return p;
}

}  // namespace

TEST_CASE("point to plane distance") {
  CHECK(point_plane_distance(PlaneParams(Eigen::Vector4d(0, 0, 1, -5)), Eigen::Vector3d(3, 4, 7)) == 2.0);
  CHECK(point_plane_distance(PlaneParams(Eigen::Vector4d(0, 0, 1, -5)), Eigen::Vector3d(-8, 1, 5)) == 0.0);
  CHECK(point_plane_distance(PlaneParams(Eigen::Vector4d(1, 0, 0, 0)), Eigen::Vector3d(2, 9, 9)) == 2.0);
}

TEST_CASE("constant disparity plane") {
  const PointSet p = points({{0, 0, 5}, {1, 0, 5}, {0, 1, 5}, {1, 1, 5}});
  const PlaneFitResult fit = fit_plane_ransac(p, {});
  CHECK(fit.inlier_count == 4);
  CHECK(fit.plane.coeffs.isApprox(Eigen::Vector4d(0, 0, 1, -5), 1e-12));
  CHECK(plane_disparity_at(fit.plane, 17.0, -3.0) == doctest::Approx(5.0));
}

TEST_CASE("degenerate inputs") {
  const PointSet collinear = points({{0, 0, 1}, {1, 1, 2}, {2, 2, 3}});
  try {
    fit_plane_ransac(collinear, {});
    FAIL("collinear points must be rejected");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("degenerate support region") != std::string::npos);
  }
  CHECK_THROWS_AS(fit_plane_ransac(points({{0, 0, 1}, {1, 0, 1}}), {}), Error);
  CHECK_THROWS_AS(refine_plane_eigen(points({{0, 0, 1}, {1, 0, 1}})), Error);
  CHECK_THROWS_AS(plane_disparity_at(PlaneParams(Eigen::Vector4d(1, 0, 0, -5)), 1.0, 1.0), Error);
}

TEST_CASE("exact points refine to zero residual") {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> uv(0, 100);
  PointSet p(30, 3);
  for (int i = 0; i < 30; ++i) {
    const double u = uv(rng), v = uv(rng);
    p.row(i) << u, v, 0.05 * u + 0.02 * v + 4.0;
  }
  const PlaneParams plane = refine_plane_eigen(p);
  for (int i = 0; i < 30; ++i) CHECK(point_plane_distance(plane, Eigen::Vector3d(p.row(i))) <= 1e-9);
}

TEST_CASE("noisy plane recovery") {
  const fixture::NoisyPlane f = fixture::noisy_plane(0);
  RansacConfig cfg;
  cfg.inlier_threshold = 0.2;
  const PlaneFitResult fit = fit_plane_ransac(f.pts, cfg);
  const Eigen::Vector4d got = fit.plane.normalized().coeffs;
  CHECK((got - f.truth).cwiseAbs().maxCoeff() <= 1e-2);
  const int oracle_count = oracle::count_inliers(f.pts, f.truth, 0.2);
  CHECK(std::abs(static_cast<int>(fit.inlier_count) - oracle_count) <= 5);
  CHECK(plane_disparity_at(fit.plane, 10.0, 10.0) == doctest::Approx(6.0).epsilon(1e-2));
}

TEST_CASE("determinism across reruns and thread counts") {
  const fixture::NoisyPlane f = fixture::noisy_plane(0);
  RansacConfig cfg;
  cfg.inlier_threshold = 0.2;
  cfg.threads = 1;
  const PlaneFitResult ref = fit_plane_ransac(f.pts, cfg);
  for (int threads : {1, 2, 8}) {
    cfg.threads = threads;
    const PlaneFitResult again = fit_plane_ransac(f.pts, cfg);
    CHECK(again.plane.coeffs == ref.plane.coeffs);
    CHECK(again.inlier_mask == ref.inlier_mask);
    CHECK(again.rms_residual == ref.rms_residual);
  }
}

TEST_CASE("inlier soundness against the winning candidate") {
  const fixture::NoisyPlane f = fixture::noisy_plane(3);
  RansacConfig cfg;
  cfg.inlier_threshold = 0.2;
  std::vector<RansacCandidate> trace;
  const PlaneFitResult fit = fit_plane_ransac(f.pts, cfg, &trace);
  REQUIRE_FALSE(trace.empty());
  const RansacCandidate* winner = nullptr;
  for (const auto& c : trace)
    if (!winner || c.inliers > winner->inliers) winner = &c;
  REQUIRE(winner->inliers == fit.inlier_count);
  for (Eigen::Index i = 0; i < f.pts.rows(); ++i) {
    const double dist = point_plane_distance(winner->plane, Eigen::Vector3d(f.pts.row(i)));
    if (fit.inlier_mask[i]) {
      CHECK(dist <= 0.2);
    } else {
      CHECK(dist > 0.2 - 1e-12);
    }
  }
}

TEST_CASE("larger threshold never loses inliers") {
  const fixture::NoisyPlane f = fixture::noisy_plane(9);
  std::size_t prev = 0;
  for (double tau : {0.05, 0.1, 0.2, 0.5, 1.0, 3.0}) {
    RansacConfig cfg;
    cfg.inlier_threshold = tau;
    const std::size_t count = fit_plane_ransac(f.pts, cfg).inlier_count;
    CHECK(count >= prev);
    prev = count;
  }
}

TEST_CASE("refinement beats every triple on small instances") {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> uv(0, 10);
  std::normal_distribution<double> noise(0, 0.3);
  for (int trial = 0; trial < 40; ++trial) {
    const int n = 4 + trial % 5;
    PointSet p(n, 3);
    for (int i = 0; i < n; ++i) {
      const double u = uv(rng), v = uv(rng);
      p.row(i) << u, v, 0.3 * u - 0.1 * v + 2 + noise(rng);
    }
    const double refined = oracle::algebraic_residual(p, refine_plane_eigen(p).coeffs);
    for (int a = 0; a < n; ++a) {
      for (int b = a + 1; b < n; ++b) {
        for (int c = b + 1; c < n; ++c) {
          const Eigen::Vector3d p1 = p.row(a), p2 = p.row(b), p3 = p.row(c);
          const Eigen::Vector3d nrm = (p2 - p1).cross(p3 - p1);
          if (nrm.norm() < 1e-9) continue;
          Eigen::Vector4d plane;
          plane << nrm, -nrm.dot(p1);
          CHECK(refined <= oracle::algebraic_residual(p, plane) * (1 + 1e-12) + 1e-12);
        }
      }
    }
  }
}

TEST_CASE("refined plane beats recorded candidates on the inlier set") {
  const fixture::NoisyPlane f = fixture::noisy_plane(0);
  RansacConfig cfg;
  cfg.inlier_threshold = 0.2;
  std::vector<RansacCandidate> trace;
  const PlaneFitResult fit = fit_plane_ransac(f.pts, cfg, &trace);
  PointSet in(static_cast<Eigen::Index>(fit.inlier_count), 3);
  Eigen::Index k = 0;
  for (Eigen::Index i = 0; i < f.pts.rows(); ++i)
    if (fit.inlier_mask[i]) in.row(k++) = f.pts.row(i);
  const double refined = oracle::algebraic_residual(in, fit.plane.coeffs);
  for (const auto& c : trace) CHECK(refined <= oracle::algebraic_residual(in, c.plane.coeffs) * (1 + 1e-12) + 1e-12);
}

TEST_CASE("config validation") {
  RansacConfig cfg;
  cfg.inlier_threshold = 0.0;
  CHECK_THROWS_AS(cfg.validate(), Error);
  cfg = {};
  cfg.max_iterations = 0;
  CHECK_THROWS_AS(cfg.validate(), Error);
}

TEST_CASE("normalized sign convention") {
  const PlaneParams p(Eigen::Vector4d(0, 0, -2, 10));
  const PlaneParams n = p.normalized();
  CHECK(n.coeffs.isApprox(Eigen::Vector4d(0, 0, 1, -5)));
  const PlaneParams q(Eigen::Vector4d(-3, 0, 4, 1));
  CHECK(q.normalized().alpha() > 0);
}
