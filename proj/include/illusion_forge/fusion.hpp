#pragma once

#include "illusion_forge/grid.hpp"

#include <optional>
#include <vector>

namespace illusion_forge {

struct AffineParams {
  double scale = 1.0;
  double shift = 0.0;
};

struct LossConfig {
  double gamma_d = 0.9;
  double w = 1.0;  ///< weight of the confidence term in the total loss
  double alpha_c = 1.0;
  double gamma_c = 2.0;

  void validate() const;
};

struct AlignResult {
  AffineParams params;
  DisparityMap aligned;
};

/// Weighted least squares fit of stereo ≈ scale·mono + shift over jointly
/// valid pixels (weights default to uniform). The aligned map is valid where
/// the mono map is valid and the aligned value is non-negative.
AlignResult align_affine(const DisparityMap& mono, const DisparityMap& stereo,
                         const std::optional<ConfidenceMap>& weights = std::nullopt);

/// conf·stereo + (1 − conf)·aligned; a pixel with exactly one valid input
/// passes that input through.
DisparityMap fuse(const DisparityMap& stereo, const DisparityMap& aligned_mono, const ConfidenceMap& conf);

/// Binary confidence target at 1/4 resolution: 1 where the 4×4 block mean of
/// |gt − pred| over valid gt pixels is below 5/4. Blocks without valid gt are
/// invalid.
ConfidenceMap confidence_gt(const DisparityMap& pred, const DisparityMap& gt);

/// Mean focal loss over the valid pixels of `gt_conf`.
double focal_confidence_loss(const ConfidenceMap& pred_conf, const ConfidenceMap& gt_conf, const LossConfig& cfg);

/// L1 terms are means over valid-gt pixels of |pred − gt| (prediction values
/// are used as stored).
double disparity_sequence_loss(const std::vector<DisparityMap>& updates, const DisparityMap& aligned_mono,
                               const DisparityMap& final_disp, const DisparityMap& gt, const LossConfig& cfg);

/// Mean over valid-gt pixels of |pred − gt|.
double mean_l1(const DisparityMap& pred, const DisparityMap& gt);

}  // namespace illusion_forge
