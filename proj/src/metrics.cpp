#include "illusion_forge/metrics.hpp"
#include "illusion_forge/error.hpp"
#include "illusion_forge/parallel.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdio>

namespace illusion_forge {

MetricSpace parse_metric_space(const std::string& name) {
  if (name == "disparity") return MetricSpace::Disparity;
  if (name == "depth") return MetricSpace::Depth;
  throw Error(ErrorCode::Validation, "unknown metric space '" + name + "' (disparity|depth)");
}

const char* to_string(MetricSpace space) { return space == MetricSpace::Depth ? "depth" : "disparity"; }

EvalInput eval_input(const DisparityMap& pred, const DisparityMap& gt) {
  return {pred.valid.select(pred.values, 0.0f), gt.values, gt.valid};
}

EvalInput eval_input(const DepthMap& pred, const DepthMap& gt) {
  return {pred.values, gt.values, gt.valid()};
}

namespace {

double mean_of(std::vector<double>& v) {
  return v.empty() ? 0.0 : pairwise_sum(v.data(), v.size()) / static_cast<double>(v.size());
}

}  // namespace

MetricReport evaluate(const EvalInput& in, const std::optional<Mask>& mask, MetricSpace space,
                      const std::vector<double>& thresholds) {
  if (in.pred.rows() != in.gt.rows() || in.pred.cols() != in.gt.cols() || in.gt_valid.rows() != in.gt.rows() ||
      in.gt_valid.cols() != in.gt.cols()) {
    throw Error(ErrorCode::Dimension, "evaluate: prediction and ground truth sizes differ");
  }
  if (mask && (mask->rows() != in.gt.rows() || mask->cols() != in.gt.cols())) {
    throw Error(ErrorCode::Dimension, "evaluate: mask size differs");
  }

  std::vector<double> abs_err, sq_err, rel, logd, within;
  std::map<double, std::vector<double>> bad;
  for (double t : thresholds) bad[t];
  MetricReport report;
  report.space = space;

  for (Eigen::Index i = 0; i < in.gt.size(); ++i) {
    if (!in.gt_valid.data()[i]) continue;
    if (mask && !mask->data()[i]) continue;
    const double r = in.pred.data()[i];
    const double g = in.gt.data()[i];
    const double e = std::abs(r - g);
    abs_err.push_back(e);
    sq_err.push_back(e * e);
    for (auto& [t, v] : bad) v.push_back(e > t ? 1.0 : 0.0);
    if (r > 0.0 && g > 0.0) {
      rel.push_back(e / g);
      logd.push_back(std::abs(std::log10(r) - std::log10(g)));
      within.push_back(std::max(r / g, g / r) < 1.25 ? 1.0 : 0.0);
    } else {
      ++report.excluded_pixels;
    }
  }
  if (abs_err.empty()) throw Error(ErrorCode::EmptyValidSet, "evaluate: no valid ground-truth pixels under the mask");
  if (space == MetricSpace::Depth && rel.empty()) {
    throw Error(ErrorCode::NonPositiveRatio, "evaluate: no pixel has positive prediction and ground truth");
  }

  report.pixel_count = abs_err.size();
  report.epe = mean_of(abs_err);
  report.rmse = std::sqrt(mean_of(sq_err));
  for (auto& [t, v] : bad) report.bad[t] = 100.0 * mean_of(v);
  report.abs_rel = mean_of(rel);
  report.log10 = mean_of(logd);
  report.delta1 = 100.0 * mean_of(within);
  return report;
}

std::string report_json(const MetricReport& report) {
  nlohmann::json bad = nlohmann::json::object();
  for (const auto& [t, v] : report.bad) {
    char key[32];
    std::snprintf(key, sizeof(key), "%g", t);
    bad[key] = v;
  }
  const nlohmann::json j = {{"space", to_string(report.space)},
                            {"epe", report.epe},
                            {"bad", bad},
                            {"abs_rel", report.abs_rel},
                            {"rmse", report.rmse},
                            {"log10", report.log10},
                            {"delta1", report.delta1},
                            {"pixels", report.pixel_count},
                            {"excluded_pixels", report.excluded_pixels}};
  return j.dump();
}

}  // namespace illusion_forge
