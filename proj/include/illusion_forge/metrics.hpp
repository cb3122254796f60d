#pragma once

#include "illusion_forge/grid.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace illusion_forge {

enum class MetricSpace { Disparity, Depth };

MetricSpace parse_metric_space(const std::string& name);
const char* to_string(MetricSpace space);

struct MetricReport {
  MetricSpace space = MetricSpace::Disparity;
  double epe = 0.0;
  std::map<double, double> bad;  ///< threshold → percentage of pixels with error > threshold
  double abs_rel = 0.0;
  double rmse = 0.0;
  double log10 = 0.0;
  double delta1 = 0.0;  ///< percentage
  std::size_t pixel_count = 0;
  std::size_t excluded_pixels = 0;  ///< dropped from the ratio metrics (non-positive values)
};

/// Prediction and ground truth share one interface in both spaces; a pixel
/// counts when gt is valid and (if given) `mask` is set. Prediction values
/// are used as stored.
struct EvalInput {
  Grid<float> pred;
  Grid<float> gt;
  Mask gt_valid;
};

EvalInput eval_input(const DisparityMap& pred, const DisparityMap& gt);
EvalInput eval_input(const DepthMap& pred, const DepthMap& gt);

MetricReport evaluate(const EvalInput& input, const std::optional<Mask>& mask, MetricSpace space,
                      const std::vector<double>& thresholds = {2.0, 3.0, 5.0});

std::string report_json(const MetricReport& report);

}  // namespace illusion_forge
