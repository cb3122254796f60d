#include "illusion_forge/cli.hpp"
#include "illusion_forge/error.hpp"
#include "illusion_forge/fusion.hpp"
#include "illusion_forge/io.hpp"
#include "illusion_forge/metrics.hpp"
#include "illusion_forge/rectification.hpp"
#include "illusion_forge/reprojection.hpp"
#include "illusion_forge/service.hpp"
#include "illusion_forge/view_synthesis.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <iostream>
#include <optional>

namespace illusion_forge {

namespace {

using json = nlohmann::json;

void add_ransac_options(CLI::App* cmd, RansacConfig& cfg) {
  cmd->add_option("--tau-d", cfg.inlier_threshold, "RANSAC inlier threshold (disparity px)")->capture_default_str();
  cmd->add_option("--iters", cfg.max_iterations, "RANSAC iterations")->capture_default_str();
  cmd->add_option("--batch", cfg.batch_size, "candidate triples per iteration")->capture_default_str();
  cmd->add_option("--seed", cfg.seed, "RNG seed")->capture_default_str();
  cmd->add_option("--min-delta", cfg.min_delta, "smallest usable |delta|")->capture_default_str();
  cmd->add_option("--threads", cfg.threads, "worker threads (0 = ILLUSION_FORGE_THREADS / all)")
      ->capture_default_str();
}

json plane_object(const PlaneFitResult& fit) { return json::parse(plane_json(fit)); }

struct FitPlaneArgs {
  std::string disparity, mask, pairs, out;
  std::size_t pair_index = 0;
  RansacConfig ransac;
};

int cmd_fit_plane(const FitPlaneArgs& a, std::ostream& out) {
  const DisparityMap disp = read_disparity(a.disparity);
  const RegionSet regions = read_regions(a.mask, a.pairs);
  const PlaneFitResult fit = fit_support_region(disp, regions, a.pair_index, a.ransac);
  const std::string text = plane_json(fit);
  if (!a.out.empty()) write_file_atomic(a.out, text + "\n");
  out << text << "\n";
  return kExitOk;
}

struct RectifyArgs {
  std::string disparity, labels, pairs, out, planes_out;
  int pair_index = -1;
  RectifyConfig cfg;
};

int cmd_rectify(const RectifyArgs& a, std::ostream& out) {
  const DisparityMap disp = read_disparity(a.disparity);
  const RegionSet regions = read_regions(a.labels, a.pairs);
  DisparityMap result;
  std::vector<PlaneFitResult> fits;
  if (a.pair_index >= 0) {
    RectifyResult r = rectify_region(disp, regions, static_cast<std::size_t>(a.pair_index), a.cfg);
    result = std::move(r.disparity);
    fits.push_back(std::move(r.fit));
  } else {
    result = rectify_all(disp, regions, a.cfg, &fits);
  }
  write_disparity(result, a.out);
  json planes = json::array();
  for (const auto& f : fits) planes.push_back(plane_object(f));
  const json summary = {{"planes", planes}, {"out", a.out}};
  if (!a.planes_out.empty()) write_file_atomic(a.planes_out, planes.dump() + "\n");
  out << summary.dump() << "\n";
  return kExitOk;
}

struct SynthArgs {
  std::string left, disparity, out, holes, warped;
  ScaleSearchConfig search;
  int inpaint_iters = 64;
  std::optional<double> scale;
};

int cmd_synth_right(const SynthArgs& a, std::ostream& out) {
  const RgbImage left = read_rgb_png(a.left);
  const DisparityMap disp = read_disparity(a.disparity);
  const double s = a.scale ? *a.scale : search_scale(disp, a.search);
  const WarpResult warp = forward_warp(left, disp, s);
  if (!a.warped.empty()) write_rgb_png(warp.image, a.warped);
  const RgbImage right = inpaint_holes(warp.image, warp.hole_mask, a.inpaint_iters);
  write_rgb_png(right, a.out);
  write_mask_png(warp.hole_mask, a.holes);
  const json summary = {{"scale", s},
                        {"valid_ratio", valid_ratio(disp, s)},
                        {"holes", warp.hole_mask.count()},
                        {"right", a.out},
                        {"hole_mask", a.holes}};
  out << summary.dump() << "\n";
  return kExitOk;
}

struct ReprojectArgs {
  std::string lidar, guide, calib, out, depth_out;
  ReprojectConfig cfg;
};

int cmd_reproject(const ReprojectArgs& a, std::ostream& out) {
  const CalibrationRig rig = read_calibration(a.calib);
  const DepthMap lidar = read_depth(a.lidar);
  const RgbImage guide = read_rgb_png(a.guide);
  const DepthMap depth = reproject_to_depth(lidar, guide, rig, a.cfg);
  const DisparityMap disp = depth_to_disparity(depth, rig.baseline_m, rig.focal_px);
  if (!a.depth_out.empty()) write_pfm(depth, a.depth_out);
  write_disparity(disp, a.out);
  const json summary = {{"valid_pixels", disp.valid.count()}, {"pixels", disp.values.size()}, {"out", a.out}};
  out << summary.dump() << "\n";
  return kExitOk;
}

struct FuseArgs {
  std::string stereo, mono, confidence, out, aligned_out;
  bool uniform_weights = false;
};

int cmd_fuse(const FuseArgs& a, std::ostream& out) {
  const DisparityMap stereo = read_disparity(a.stereo);
  const DisparityMap mono = read_disparity(a.mono);
  const ConfidenceMap conf = read_confidence(a.confidence);
  const AlignResult aligned =
      align_affine(mono, stereo, a.uniform_weights ? std::nullopt : std::optional<ConfidenceMap>(conf));
  const DisparityMap fused = fuse(stereo, aligned.aligned, conf);
  if (!a.aligned_out.empty()) write_disparity(aligned.aligned, a.aligned_out);
  write_disparity(fused, a.out);
  const json summary = {{"scale", aligned.params.scale}, {"shift", aligned.params.shift}, {"out", a.out}};
  out << summary.dump() << "\n";
  return kExitOk;
}

struct ConfidenceArgs {
  std::string pred, gt, out;
};

int cmd_confidence_gt(const ConfidenceArgs& a, std::ostream& out) {
  const ConfidenceMap conf = confidence_gt(read_disparity(a.pred), read_disparity(a.gt));
  if (fs::path(a.out).extension() == ".pfm") {
    write_pfm(Grid<float>(conf.valid.select(conf.values, 0.0f)), a.out);
  } else {
    write_mask_png(conf.valid && (conf.values > 0.5f), a.out);
  }
  const json summary = {{"blocks", conf.values.size()},
                        {"valid_blocks", conf.valid.count()},
                        {"confident_blocks", (conf.valid && (conf.values > 0.5f)).count()},
                        {"out", a.out}};
  out << summary.dump() << "\n";
  return kExitOk;
}

struct EvalArgs {
  std::string pred, gt, space = "disparity", mask, out;
  std::vector<double> thresholds{2.0, 3.0, 5.0};
};

int cmd_eval(const EvalArgs& a, std::ostream& out) {
  const MetricSpace space = parse_metric_space(a.space);
  const EvalInput input = space == MetricSpace::Depth ? eval_input(read_depth(a.pred), read_depth(a.gt))
                                                      : eval_input(read_disparity(a.pred), read_disparity(a.gt));
  std::optional<Mask> mask;
  if (!a.mask.empty()) mask = Mask(read_gray8_png(a.mask) != 0);
  const std::string text = report_json(evaluate(input, mask, space, a.thresholds));
  if (!a.out.empty()) write_file_atomic(a.out, text + "\n");
  out << text << "\n";
  return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Stereo data generation and evaluation toolkit", "illusion-forge"};
  app.require_subcommand(1);

  FitPlaneArgs fit_args;
  auto* fit = app.add_subcommand("fit-plane", "RANSAC plane fit of a support region in disparity space");
  fit->add_option("--disparity", fit_args.disparity, "disparity map (.pfm or 16-bit .png)")->required();
  fit->add_option("--mask", fit_args.mask, "8-bit region label PNG")->required();
  fit->add_option("--pairs", fit_args.pairs, "region pairs JSON")->required();
  fit->add_option("--pair-index", fit_args.pair_index, "pair to fit")->capture_default_str();
  fit->add_option("--out", fit_args.out, "plane JSON output");
  add_ransac_options(fit, fit_args.ransac);

  RectifyArgs rect_args;
  auto* rect = app.add_subcommand("rectify", "replace illusion regions by their support plane");
  rect->add_option("--disparity", rect_args.disparity)->required();
  rect->add_option("--labels,--mask", rect_args.labels, "8-bit region label PNG")->required();
  rect->add_option("--pairs", rect_args.pairs)->required();
  rect->add_option("--pair-index", rect_args.pair_index, "single pair (-1 = all pairs)")->capture_default_str();
  rect->add_option("--feather", rect_args.cfg.feather_px, "feather band width (px)")->capture_default_str();
  rect->add_option("--min-support", rect_args.cfg.min_support_points, "minimum valid support pixels")
      ->capture_default_str();
  rect->add_option("--out", rect_args.out, "rectified disparity output")->required();
  rect->add_option("--planes-out", rect_args.planes_out, "plane JSON list output");
  add_ransac_options(rect, rect_args.cfg.ransac);

  SynthArgs synth_args;
  auto* synth = app.add_subcommand("synth-right", "synthesize a right view by forward warping");
  synth->add_option("--left", synth_args.left, "left RGB PNG")->required();
  synth->add_option("--disparity", synth_args.disparity)->required();
  synth->add_option("--tau", synth_args.search.tau, "target in-bounds pixel ratio")->capture_default_str();
  synth->add_option("--epsilon", synth_args.search.epsilon)->capture_default_str();
  synth->add_option("--max-iters", synth_args.search.max_iterations)->capture_default_str();
  synth->add_option("--scale", synth_args.scale, "fixed scale (skips the search)");
  synth->add_option("--inpaint-iters", synth_args.inpaint_iters)->capture_default_str();
  synth->add_option("--out", synth_args.out, "right image PNG")->required();
  synth->add_option("--holes", synth_args.holes, "hole mask PNG")->required();
  synth->add_option("--warped", synth_args.warped, "warped image before hole filling");

  ReprojectArgs rep_args;
  auto* rep = app.add_subcommand("reproject", "lidar depth to left-camera disparity");
  rep->add_option("--lidar-depth", rep_args.lidar, "lidar depth (.pfm meters or 16-bit .png millimetres)")
      ->required();
  rep->add_option("--guide", rep_args.guide, "left RGB PNG")->required();
  rep->add_option("--calib", rep_args.calib, "calibration JSON")->required();
  rep->add_option("--tau", rep_args.cfg.backward_tau, "backward validation threshold (m)")->capture_default_str();
  rep->add_option("--upsample", rep_args.cfg.upsample_factor)->capture_default_str();
  rep->add_option("--area-th", rep_args.cfg.small_area_th)->capture_default_str();
  rep->add_option("--radius", rep_args.cfg.guided_radius)->capture_default_str();
  rep->add_option("--eps", rep_args.cfg.guided_eps)->capture_default_str();
  rep->add_option("--noise-tau", rep_args.cfg.noise_tau)->capture_default_str();
  rep->add_option("--median-size", rep_args.cfg.median_size)->capture_default_str();
  rep->add_option("--fill-iters", rep_args.cfg.fill_iterations)->capture_default_str();
  rep->add_option("--out", rep_args.out, "disparity output")->required();
  rep->add_option("--depth-out", rep_args.depth_out, "depth PFM before disparity conversion");

  FuseArgs fuse_args;
  auto* fus = app.add_subcommand("fuse", "align monocular disparity and blend with stereo by confidence");
  fus->add_option("--stereo", fuse_args.stereo)->required();
  fus->add_option("--mono", fuse_args.mono)->required();
  fus->add_option("--confidence", fuse_args.confidence, "confidence map (.png or .pfm)")->required();
  fus->add_option("--out", fuse_args.out)->required();
  fus->add_option("--aligned-out", fuse_args.aligned_out);
  fus->add_flag("--uniform-weights", fuse_args.uniform_weights, "ignore confidence when aligning");

  ConfidenceArgs conf_args;
  auto* conf = app.add_subcommand("confidence-gt", "binary confidence target at quarter resolution");
  conf->add_option("--pred", conf_args.pred)->required();
  conf->add_option("--gt", conf_args.gt)->required();
  conf->add_option("--out", conf_args.out, ".png (0/255) or .pfm")->required();

  EvalArgs eval_args;
  auto* ev = app.add_subcommand("eval", "evaluate a prediction against ground truth");
  ev->add_option("--pred", eval_args.pred)->required();
  ev->add_option("--gt", eval_args.gt)->required();
  ev->add_option("--space", eval_args.space, "disparity|depth")->capture_default_str();
  ev->add_option("--thresholds", eval_args.thresholds, "bad-x thresholds")->delimiter(',')->capture_default_str();
  ev->add_option("--mask", eval_args.mask, "8-bit PNG; nonzero pixels are evaluated");
  ev->add_option("--out", eval_args.out, "JSON report output");

  std::string data_dir, host = "127.0.0.1";
  int port = 8080;
  auto* serve = app.add_subcommand("serve", "HTTP service for the annotation UI");
  serve->add_option("--port", port)->capture_default_str();
  serve->add_option("--host", host)->capture_default_str();
  serve->add_option("--data-dir", data_dir)->required();

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::Success& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kExitUsage;
  }

  try {
    if (*fit) return cmd_fit_plane(fit_args, out);
    if (*rect) return cmd_rectify(rect_args, out);
    if (*synth) return cmd_synth_right(synth_args, out);
    if (*rep) return cmd_reproject(rep_args, out);
    if (*fus) return cmd_fuse(fuse_args, out);
    if (*conf) return cmd_confidence_gt(conf_args, out);
    if (*ev) return cmd_eval(eval_args, out);
    if (*serve) {
      AnnotationService service(data_dir);
      err << "serving " << data_dir << " on http://" << host << ":" << port << "\n";
      service.listen(host, port);
      return kExitOk;
    }
  } catch (const Error& e) {
    err << "error [" << to_string(e.code()) << "]: " << e.what() << "\n";
    return kExitProcessing;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitProcessing;
  }
  return kExitUsage;
}

}  // namespace illusion_forge
