// Acceptance gate: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

#include "illusion_forge/fusion.hpp"
#include "illusion_forge/image_ops.hpp"
#include "illusion_forge/io.hpp"
#include "illusion_forge/metrics.hpp"
#include "illusion_forge/plane_fit.hpp"
#include "illusion_forge/reprojection.hpp"
#include "illusion_forge/view_synthesis.hpp"

#include "fixtures.hpp"
#include "oracles.hpp"
#include "scenes.hpp"
#include "test_support.hpp"

#include <json.hpp>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <sstream>
#include <sys/wait.h>

using namespace illusion_forge;
using json = nlohmann::json;

namespace {

struct Outcome {
  bool ok = true;
  std::string detail;

  void require(bool cond, const std::string& what) {
    if (!cond && ok) detail = what;
    ok = ok && cond;
  }
};

int failures = 0;

void criterion(const std::string& name, double budget_s, const std::function<Outcome()>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o.ok = false;
    o.detail = std::string("exception: ") + e.what();
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (o.ok && secs > budget_s) {
    o.ok = false;
    o.detail = "over time budget";
  }
  if (!o.ok) ++failures;
  std::printf("%s  %-28s %8.3f s / %.0f s  %s\n", o.ok ? "PASS" : "FAIL", name.c_str(), secs, budget_s,
              o.detail.c_str());
  std::fflush(stdout);
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

Outcome plane_in_disparity() {
  Outcome o;
  std::mt19937_64 rng(2024);
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) worst = std::max(worst, oracle::coplanarity_residual(oracle::random_plane_in_disparity(rng)));
  o.require(worst <= 1e-6, "residual " + fmt(worst));
  o.detail = o.ok ? "worst relative residual " + fmt(worst) : o.detail;
  return o;
}

Outcome ransac_recovery() {
  Outcome o;
  const fixture::NoisyPlane f = fixture::noisy_plane(0);
  RansacConfig cfg;
  cfg.inlier_threshold = 0.2;
  cfg.threads = 1;
  const PlaneFitResult ref = fit_plane_ransac(f.pts, cfg);
  const double err = (ref.plane.normalized().coeffs - f.truth).cwiseAbs().maxCoeff();
  const int oracle_count = oracle::count_inliers(f.pts, f.truth, cfg.inlier_threshold);
  const int diff = static_cast<int>(ref.inlier_count) - oracle_count;
  o.require(err <= 1e-2, "param error " + fmt(err));
  o.require(std::abs(diff) <= 5, "inlier count off by " + std::to_string(diff));
  for (int run = 0; run < 3; ++run) {
    for (int threads : {1, 8}) {
      cfg.threads = threads;
      const PlaneFitResult again = fit_plane_ransac(f.pts, cfg);
      o.require(again.plane.coeffs == ref.plane.coeffs && again.inlier_mask == ref.inlier_mask,
                "nondeterministic at " + std::to_string(threads) + " threads");
    }
  }
  if (o.ok) o.detail = "param error " + fmt(err) + ", inliers " + std::to_string(ref.inlier_count) + " vs oracle " +
                       std::to_string(oracle_count);
  return o;
}

Outcome warp_oracle() {
  Outcome o;
  std::mt19937_64 rng(99);
  std::uniform_int_distribution<int> q(0, 40);
  std::uniform_real_distribution<double> scale(0.3, 1.5);
  for (int trial = 0; trial < 50; ++trial) {
    const RgbImage img = test_support::random_image(rng, 16, 16);
    Grid<float> g(16, 16);
    for (Eigen::Index i = 0; i < g.size(); ++i) g(i) = q(rng) * 0.2f;
    const DisparityMap d = DisparityMap::from_values(g);
    const double s = trial % 3 == 0 ? 1.0 : scale(rng);
    const WarpResult w = forward_warp(img, d, s);
    const oracle::WarpOracle ref = oracle::brute_force_warp(d, s);
    for (int r = 0; r < 16; ++r) {
      for (int c = 0; c < 16; ++c) {
        const int src = ref.winner(r, c);
        o.require(w.hole_mask(r, c) == (src < 0), "hole mismatch in frame " + std::to_string(trial));
        if (src >= 0) {
          o.require(w.image.pixel(r, c) == img.pixel(r, src) && w.source_disparity(r, c) == d.values(r, src),
                    "winner mismatch in frame " + std::to_string(trial));
        }
      }
    }
  }
  if (o.ok) o.detail = "50 frames match";
  return o;
}

Outcome scale_search() {
  Outcome o;
  std::mt19937_64 rng(5);
  double worst = 0.0;
  for (int i = 0; i < 20; ++i) {
    const int w = std::uniform_int_distribution<int>(16, 256)(rng);
    const int k = std::uniform_int_distribution<int>(1, w / 4)(rng);
    const double d = std::uniform_real_distribution<double>(0.5, 40.0)(rng);
    ScaleSearchConfig cfg;
    cfg.tau = 1.0 - static_cast<double>(k) / w;
    const double expect = w * (1.0 - cfg.tau) / d;
    const double got =
        search_scale(DisparityMap::from_values(Grid<float>::Constant(2, w, static_cast<float>(d))), cfg);
    worst = std::max(worst, std::abs(got - expect) / expect);
  }
  o.require(worst <= 1e-3, "relative error " + fmt(worst));
  if (o.ok) o.detail = "worst relative error " + fmt(worst);
  return o;
}

Outcome reprojection() {
  Outcome o;
  const Intrinsicsd left{400.0, 400.0, 32.0, 24.0, 64, 48};
  const RgbImage guide = test_support::uniform_image(left.width, left.height, 120);
  double worst = 0.0;

  auto check_scene = [&](const scene::Plane3& plane, const Eigen::Vector3d& t, const std::string& name) {
    const CalibrationRig rig = scene::rig(left, left, t);
    const scene::Plane3 lidar_plane = scene::moved(plane, Eigen::Matrix3d::Identity(), -t);
    const DepthMap z = reproject_to_depth(scene::render_depth(lidar_plane, left), guide, rig, {});
    const auto valid = z.valid().count();
    o.require(valid > left.width * left.height / 2, name + ": only " + std::to_string(valid) + " valid pixels");
    for (int v = 0; v < left.height; ++v) {
      for (int u = 0; u < left.width; ++u) {
        if (!z.is_valid(v, u)) continue;
        const double err = std::abs(z.values(v, u) - scene::ray_depth(plane, left, u, v));
        worst = std::max(worst, err);
      }
    }
  };
  check_scene({{0, 0, 1}, 2.0}, Eigen::Vector3d::Zero(), "wall");
  check_scene({{0, 0, 1}, 2.0}, {0.02, 0, 0.01}, "shifted wall");
  check_scene({Eigen::Vector3d(0.02, 0.01, 1.0), 3.0}, {0.05, 0, 0}, "slanted plane");
  o.require(worst <= 1e-3, "depth error " + fmt(worst) + " m");

  // backward validation against a perturbation set; the lidar canvas covers
  // every left pixel so nothing is lost to bounds
  const scene::Plane3 plane{Eigen::Vector3d(0.02, 0.01, 1.0), 3.0};
  const Eigen::Vector3d t(0.05, 0, 0);
  const Intrinsicsd lidar{400.0, 400.0, 64.0, 48.0, 128, 96};
  const CalibrationRig rig = scene::rig(left, lidar, t);
  const DepthMap lidar_depth = scene::render_depth(scene::moved(plane, Eigen::Matrix3d::Identity(), -t), lidar);
  DepthMap zed = scene::render_depth(plane, left);
  const double tau = 0.05;
  Mask perturbed = Mask::Constant(left.height, left.width, false);
  std::mt19937_64 rng(17);
  std::uniform_int_distribution<int> pu(0, left.width - 1), pv(0, left.height - 1);
  for (int i = 0; i < 60; ++i) {
    const int u = pu(rng), v = pv(rng);
    perturbed(v, u) = true;
    zed.values(v, u) += static_cast<float>((i % 2 ? 10.0 : -10.0) * tau);
  }
  const DepthMap kept = backward_validate(zed, lidar_depth, rig, tau);
  const Mask zeroed = zed.valid() && !kept.valid();
  const double tp = (zeroed && perturbed).count();
  const double precision = zeroed.count() ? tp / zeroed.count() : 0.0;
  const double recall = tp / perturbed.count();
  o.require(precision == 1.0 && recall == 1.0, "precision " + fmt(precision) + " recall " + fmt(recall));
  if (o.ok) o.detail = "worst depth error " + fmt(worst) + " m, precision = recall = 1";
  return o;
}

Outcome zbuffer_and_median() {
  Outcome o;
  std::mt19937_64 rng(32);
  std::uniform_real_distribution<double> pos(-0.5, 32.5), z(0.3, 12.0);
  for (int trial = 0; trial < 5; ++trial) {
    std::vector<PixelSample<double>> samples(500);
    for (auto& s : samples) s = {pos(rng), pos(rng), z(rng)};
    o.require((zbuffer_splat(samples, 32, 32).values == oracle::brute_force_zbuffer(samples, 32, 32)).all(),
              "z-buffer mismatch");
  }
  std::bernoulli_distribution hole(0.2), spike(0.1);
  std::uniform_real_distribution<float> base(1.98f, 2.02f);
  for (int trial = 0; trial < 5; ++trial) {
    Grid<float> g(32, 32);
    for (Eigen::Index i = 0; i < g.size(); ++i) g(i) = hole(rng) ? 0.0f : base(rng) + (spike(rng) ? 0.4f : 0.0f);
    ReprojectConfig cfg;
    const Mask expect = oracle::brute_force_noise_gate(g, cfg.median_size, cfg.noise_tau);
    const DepthMap out = suppress_noise(DepthMap(g), cfg);
    const Mask zeroed = (g > 0.0f) && (out.values == 0.0f);
    o.require((zeroed == expect).all(), "median gate mismatch");
  }
  if (o.ok) o.detail = "exact match";
  return o;
}

Outcome affine() {
  Outcome o;
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<float> val(0.5f, 30.0f), wt(0.0f, 1.0f), sc(0.2f, 3.0f), sh(-5.0f, 5.0f);
  std::normal_distribution<float> noise(0.0f, 0.5f);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    Grid<float> m(8, 8), s(8, 8), c(8, 8);
    const float a = sc(rng), b = sh(rng);
    for (Eigen::Index i = 0; i < 64; ++i) {
      m(i) = val(rng);
      s(i) = std::max(0.1f, a * m(i) + b + noise(rng));
      c(i) = wt(rng);
    }
    const AlignResult got =
        align_affine(DisparityMap::from_values(m), DisparityMap::from_values(s), ConfidenceMap::dense(c));
    std::vector<double> mv, sv, wv;
    for (Eigen::Index i = 0; i < 64; ++i) {
      if (!(c(i) > 0.0f)) continue;
      mv.push_back(m(i));
      sv.push_back(s(i));
      wv.push_back(c(i));
    }
    const Eigen::Vector2d ref = oracle::affine_normal_equations(mv, sv, wv);
    worst = std::max({worst, std::abs(got.params.scale - ref(0)), std::abs(got.params.shift - ref(1))});
  }
  o.require(worst <= 1e-9, "oracle disagreement " + fmt(worst));
  Grid<float> m(1, 4), s(1, 4);
  m << 0, 1, 2, 3;
  s << 1, 3, 5, 7;
  const AlignResult exact = align_affine(DisparityMap(m, Mask::Constant(1, 4, true)),
                                         DisparityMap(s, Mask::Constant(1, 4, true)), std::nullopt);
  o.require(exact.params.scale == 2.0 && exact.params.shift == 1.0,
            "noiseless fixture gave " + fmt(exact.params.scale) + ", " + fmt(exact.params.shift));
  if (o.ok) o.detail = "max oracle difference " + fmt(worst) + ", noiseless fixture exact";
  return o;
}

Outcome losses() {
  Outcome o;
  LossConfig cfg;
  const ConfidenceMap half = ConfidenceMap::dense(Grid<float>::Constant(4, 4, 0.5f));
  const ConfidenceMap one = ConfidenceMap::dense(Grid<float>::Constant(4, 4, 1.0f));
  const double focal = focal_confidence_loss(half, one, cfg);
  o.require(std::abs(focal - 0.1733) <= 1e-4, "focal " + fmt(focal));

  auto constant = [](float v) { return DisparityMap::from_values(Grid<float>::Constant(4, 4, v)); };
  const double seq = disparity_sequence_loss({constant(3.0f)}, constant(3.0f), constant(3.0f), constant(2.0f), cfg);
  o.require(std::abs(seq - 2.71) <= 1e-9, "sequence " + fmt(seq));

  const DisparityMap gt = constant(10.0f);
  o.require((confidence_gt(constant(11.0f), gt).values == 1.0f).all(), "error 1.0 block");
  o.require((confidence_gt(constant(12.0f), gt).values == 0.0f).all(), "error 2.0 block");
  DisparityMap mixed = constant(10.0f);
  mixed.values.leftCols(2).setConstant(14.0f);
  o.require(confidence_gt(mixed, gt).values(0, 0) == 0.0f, "mixed block");
  if (o.ok) o.detail = "focal " + fmt(focal) + ", sequence " + fmt(seq);
  return o;
}

Outcome metrics() {
  Outcome o;
  auto constant = [](float v) { return DisparityMap::from_values(Grid<float>::Constant(6, 6, v)); };
  const MetricReport id = evaluate(eval_input(constant(7.0f), constant(7.0f)), std::nullopt, MetricSpace::Disparity);
  o.require(id.epe == 0.0 && id.bad.at(2) == 0.0 && id.bad.at(3) == 0.0 && id.bad.at(5) == 0.0 &&
                id.abs_rel == 0.0 && id.delta1 == 100.0,
            "identity fixture");
  const MetricReport shift =
      evaluate(eval_input(constant(10.0f), constant(7.0f)), std::nullopt, MetricSpace::Disparity);
  o.require(shift.epe == 3.0 && shift.bad.at(2) == 100.0 && shift.bad.at(3) == 0.0, "shift fixture");
  const MetricReport depth = evaluate(eval_input(DepthMap(Grid<float>::Constant(6, 6, 2.2f)),
                                                 DepthMap(Grid<float>::Constant(6, 6, 2.0f))),
                                      std::nullopt, MetricSpace::Depth);
  o.require(std::abs(depth.abs_rel - 0.1) < 1e-6 && std::abs(depth.rmse - 0.2) < 1e-6 && depth.delta1 == 100.0,
            "depth fixture");
  std::mt19937_64 rng(3);
  const std::vector<double> th = {0.5, 1, 2, 3, 4, 5, 10};
  for (int i = 0; i < 100; ++i) {
    const DisparityMap gt = test_support::random_disparity(rng, 10, 10, 0.5f, 30.0f, 0.1);
    const DisparityMap pred = test_support::random_disparity(rng, 10, 10, 0.5f, 30.0f, 0.1);
    const MetricReport r = evaluate(eval_input(pred, gt), std::nullopt, MetricSpace::Disparity, th);
    for (std::size_t k = 1; k < th.size(); ++k) o.require(r.bad.at(th[k - 1]) >= r.bad.at(th[k]), "bad-x order");
  }
  if (o.ok) o.detail = "fixtures exact, bad-x monotone";
  return o;
}

Outcome formats() {
  Outcome o;
  std::mt19937_64 rng(1000);
  std::uniform_int_distribution<int> dim(1, 32);
  float worst = 0.0f;
  for (int i = 0; i < 1000; ++i) {
    const DisparityMap d = test_support::random_disparity(rng, dim(rng), dim(rng), 0.01f, 255.0f, 0.15);
    const Grid<float> stored = d.valid.select(d.values, 0.0f);
    const Grid<float> pfm = decode_pfm(encode_pfm(stored));
    o.require(pfm.rows() == stored.rows() && pfm.cols() == stored.cols() && (pfm == stored).all(), "pfm mismatch");
    const DisparityMap png = decode_png16_disparity(encode_png16_disparity(d));
    o.require((png.valid == d.valid).all(), "png16 validity mismatch");
    worst = std::max(worst, (png.values - d.values).abs().maxCoeff());
  }
  o.require(worst <= 1.0f / 512.0f, "png16 error " + fmt(worst));
  if (o.ok) o.detail = "pfm exact, png16 max error " + fmt(worst);
  return o;
}

int run_binary(const std::string& args, const fs::path& out_file) {
  const std::string cmd = std::string(ILLUSION_FORGE_BIN) + " " + args + " > " + out_file.string() + " 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string read_text(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome cli_end_to_end() {
  Outcome o;
  test_support::TempDir tmp("if-accept");
  const fs::path frame = fixture::write_frame(tmp.path(), "frame0");
  const std::string disp = (frame / "disparity.pfm").string();
  const std::string labels = (frame / "labels.png").string(), pairs = (frame / "pairs.json").string();

  int code = run_binary("fit-plane --disparity " + disp + " --mask " + labels + " --pairs " + pairs + " --out " +
                            (tmp / "plane.json").string(),
                        tmp / "fit.log");
  o.require(code == 0, "fit-plane exit " + std::to_string(code) + ": " + read_text(tmp / "fit.log"));
  if (!o.ok) return o;
  const json plane = json::parse(read_text(tmp / "plane.json"));
  const Eigen::Vector4d truth = Eigen::Vector4d(0.05, 0.02, -1.0, 8.0) / Eigen::Vector3d(0.05, 0.02, -1.0).norm();
  const Eigen::Vector4d got(plane["alpha"], plane["beta"], plane["delta"], plane["gamma"]);
  o.require((got - truth).cwiseAbs().maxCoeff() < 1e-6, "plane json off the support plane");

  const std::string rect = (tmp / "rectified.pfm").string();
  code = run_binary("rectify --disparity " + disp + " --labels " + labels + " --pairs " + pairs + " --out " + rect,
                    tmp / "rect.log");
  o.require(code == 0, "rectify exit " + std::to_string(code) + ": " + read_text(tmp / "rect.log"));
  if (!o.ok) return o;
  const DisparityMap before = read_disparity(disp);
  const DisparityMap after = read_disparity(rect);
  const Mask ill = fixture::frame_regions().mask_of(1);
  double plane_err = 0.0;
  for (int v = 0; v < fixture::kHeight; ++v)
    for (int u = 0; u < fixture::kWidth; ++u)
      plane_err = std::max(plane_err, std::abs(after.values(v, u) - fixture::plane_disparity(u, v)));
  o.require(plane_err < 1e-4, "rectified map deviates from the plane by " + fmt(plane_err));
  const Grid<double> dist = distance_to_mask(ill);
  for (Eigen::Index i = 0; i < dist.size(); ++i)
    if (dist(i) >= 8.0) o.require(after.values(i) == before.values(i), "pixel outside the feather band changed");

  const std::string right = (tmp / "right.png").string(), holes = (tmp / "holes.png").string();
  code = run_binary("synth-right --left " + (frame / "left.png").string() + " --disparity " + rect + " --out " +
                        right + " --holes " + holes,
                    tmp / "synth.log");
  o.require(code == 0, "synth-right exit " + std::to_string(code) + ": " + read_text(tmp / "synth.log"));
  if (!o.ok) return o;
  const double scale = json::parse(read_text(tmp / "synth.log"))["scale"].get<double>();
  const RgbImage left_img = read_rgb_png(frame / "left.png");
  const WarpResult warp = forward_warp(left_img, after, scale);
  const Grid<std::uint8_t> hole_png = read_gray8_png(holes);
  o.require(((hole_png != 0) == warp.hole_mask).all(), "hole mask differs from the warp");
  const RgbImage right_img = read_rgb_png(right);
  for (int v = 0; v < fixture::kHeight; ++v)
    for (int u = 0; u < fixture::kWidth; ++u)
      if (!warp.hole_mask(v, u)) o.require(right_img.pixel(v, u) == warp.image.pixel(v, u), "non-hole pixel changed");
  o.require(valid_ratio(after, scale) >= 0.9 - 1e-9, "valid ratio below tau");

  Grid<float> gt(fixture::kHeight, fixture::kWidth);
  for (int v = 0; v < fixture::kHeight; ++v)
    for (int u = 0; u < fixture::kWidth; ++u) gt(v, u) = static_cast<float>(fixture::plane_disparity(u, v));
  write_pfm(gt, tmp / "gt.pfm");
  code = run_binary("eval --pred " + rect + " --gt " + (tmp / "gt.pfm").string() + " --out " +
                        (tmp / "metrics.json").string(),
                    tmp / "eval.log");
  o.require(code == 0, "eval exit " + std::to_string(code) + ": " + read_text(tmp / "eval.log"));
  if (!o.ok) return o;
  const json m = json::parse(read_text(tmp / "metrics.json"));
  o.require(m["epe"].get<double>() < 1e-4 && m["bad"]["2"].get<double>() == 0.0, "eval of the rectified map");
  if (o.ok) o.detail = "4 commands, scale " + fmt(scale) + ", epe " + fmt(m["epe"].get<double>());
  return o;
}

}  // namespace

int main() {
  criterion("plane-in-disparity", 1, plane_in_disparity);
  criterion("ransac-recovery", 1, ransac_recovery);
  criterion("forward-warp-oracle", 5, warp_oracle);
  criterion("scale-search", 1, scale_search);
  criterion("reprojection-round-trip", 5, reprojection);
  criterion("zbuffer-median-oracle", 1, zbuffer_and_median);
  criterion("affine-alignment", 1, affine);
  criterion("loss-evaluators", 1, losses);
  criterion("metrics", 1, metrics);
  criterion("format-round-trips", 1, formats);
  criterion("cli-end-to-end", 30, cli_end_to_end);
  std::printf("%d of 11 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
