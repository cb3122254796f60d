#include "illusion_forge/fusion.hpp"
#include "illusion_forge/error.hpp"
#include "illusion_forge/parallel.hpp"

#include <algorithm>
#include <cmath>

namespace illusion_forge {

namespace {

template <typename A, typename B>
void check_same_size(const A& a, const B& b, const char* what) {
  if (a.values.rows() != b.values.rows() || a.values.cols() != b.values.cols()) {
    throw Error(ErrorCode::Dimension, std::string(what) + ": map sizes differ");
  }
}

}  // namespace

void LossConfig::validate() const {
  if (!(gamma_d > 0.0 && gamma_d <= 1.0)) throw Error(ErrorCode::Validation, "loss: gamma_d must be in (0, 1]");
}

AlignResult align_affine(const DisparityMap& mono, const DisparityMap& stereo,
                         const std::optional<ConfidenceMap>& weights) {
  check_same_size(mono, stereo, "align_affine");
  if (weights) check_same_size(mono, *weights, "align_affine");

  std::vector<double> w, m, s;
  for (Eigen::Index i = 0; i < mono.values.size(); ++i) {
    if (!mono.valid.data()[i] || !stereo.valid.data()[i]) continue;
    double wi = 1.0;
    if (weights) {
      if (!weights->valid.data()[i]) continue;
      wi = weights->values.data()[i];
    }
    if (!(wi > 0.0)) continue;
    w.push_back(wi);
    m.push_back(mono.values.data()[i]);
    s.push_back(stereo.values.data()[i]);
  }
  if (w.empty()) throw Error(ErrorCode::EmptyValidSet, "align_affine: no jointly valid pixels");

  const std::size_t n = w.size();
  std::vector<double> buf(n);
  auto wsum = [&](auto f) {
    for (std::size_t i = 0; i < n; ++i) buf[i] = f(i);
    return pairwise_sum(buf.data(), n);
  };
  const double sw = wsum([&](std::size_t i) { return w[i]; });
  const double m_bar = wsum([&](std::size_t i) { return w[i] * m[i]; }) / sw;
  const double s_bar = wsum([&](std::size_t i) { return w[i] * s[i]; }) / sw;
  const double smm = wsum([&](std::size_t i) { return w[i] * (m[i] - m_bar) * (m[i] - m_bar); });
  const double sms = wsum([&](std::size_t i) { return w[i] * (m[i] - m_bar) * (s[i] - s_bar); });
  const double scale_ref = wsum([&](std::size_t i) { return w[i] * m[i] * m[i]; });
  if (n < 2 || !(smm > 1e-12 * scale_ref)) {
    throw Error(ErrorCode::RankDeficient, "align_affine: monocular disparity is constant over the valid pixels");
  }

  AlignResult out;
  out.params.scale = sms / smm;
  out.params.shift = s_bar - out.params.scale * m_bar;
  out.aligned = DisparityMap::invalid(mono.height(), mono.width());
  for (Eigen::Index i = 0; i < mono.values.size(); ++i) {
    if (!mono.valid.data()[i]) continue;
    const double v = out.params.scale * mono.values.data()[i] + out.params.shift;
    if (v >= 0.0) {
      out.aligned.values.data()[i] = static_cast<float>(v);
      out.aligned.valid.data()[i] = true;
    }
  }
  return out;
}

DisparityMap fuse(const DisparityMap& stereo, const DisparityMap& aligned_mono, const ConfidenceMap& conf) {
  check_same_size(stereo, aligned_mono, "fuse");
  check_same_size(stereo, conf, "fuse");
  DisparityMap out = DisparityMap::invalid(stereo.height(), stereo.width());
  for (Eigen::Index i = 0; i < stereo.values.size(); ++i) {
    const bool vs = stereo.valid.data()[i], vm = aligned_mono.valid.data()[i];
    float v = 0.0f;
    if (vs && vm) {
      const double c = std::clamp(static_cast<double>(conf.values.data()[i]), 0.0, 1.0);
      v = static_cast<float>(c * stereo.values.data()[i] + (1.0 - c) * aligned_mono.values.data()[i]);
    } else if (vs) {
      v = stereo.values.data()[i];
    } else if (vm) {
      v = aligned_mono.values.data()[i];
    } else {
      continue;
    }
    out.values.data()[i] = v;
    out.valid.data()[i] = true;
  }
  return out;
}

ConfidenceMap confidence_gt(const DisparityMap& pred, const DisparityMap& gt) {
  check_same_size(pred, gt, "confidence_gt");
  const int h = gt.height(), w = gt.width();
  if (h % 4 != 0 || w % 4 != 0) {
    throw Error(ErrorCode::Dimension, "confidence_gt: dimensions must be divisible by 4");
  }
  ConfidenceMap out(Grid<float>::Zero(h / 4, w / 4), Mask::Constant(h / 4, w / 4, false));
  for (int br = 0; br < h / 4; ++br) {
    for (int bc = 0; bc < w / 4; ++bc) {
      double sum = 0.0;
      int n = 0;
      for (int r = br * 4; r < br * 4 + 4; ++r) {
        for (int c = bc * 4; c < bc * 4 + 4; ++c) {
          if (!gt.valid(r, c) || !pred.valid(r, c)) continue;
          sum += std::abs(static_cast<double>(gt.values(r, c)) - pred.values(r, c));
          ++n;
        }
      }
      if (n == 0) continue;
      out.valid(br, bc) = true;
      out.values(br, bc) = sum / n < 1.25 ? 1.0f : 0.0f;
    }
  }
  return out;
}

double focal_confidence_loss(const ConfidenceMap& pred_conf, const ConfidenceMap& gt_conf, const LossConfig& cfg) {
  check_same_size(pred_conf, gt_conf, "focal_confidence_loss");
  constexpr double kClamp = 1e-7;
  std::vector<double> terms;
  terms.reserve(static_cast<std::size_t>(gt_conf.values.size()));
  for (Eigen::Index i = 0; i < gt_conf.values.size(); ++i) {
    if (!gt_conf.valid.data()[i]) continue;
    const double p = std::clamp(static_cast<double>(pred_conf.values.data()[i]), kClamp, 1.0 - kClamp);
    const double g = gt_conf.values.data()[i];
    const double bce = -g * std::log(p) - (1.0 - g) * std::log(1.0 - p);
    terms.push_back(cfg.alpha_c * std::pow(1.0 - std::exp(-bce), cfg.gamma_c) * bce);
  }
  if (terms.empty()) throw Error(ErrorCode::EmptyValidSet, "focal_confidence_loss: no valid target pixels");
  return pairwise_sum(terms.data(), terms.size()) / static_cast<double>(terms.size());
}

double mean_l1(const DisparityMap& pred, const DisparityMap& gt) {
  check_same_size(pred, gt, "l1");
  std::vector<double> terms;
  terms.reserve(static_cast<std::size_t>(gt.values.size()));
  for (Eigen::Index i = 0; i < gt.values.size(); ++i) {
    if (!gt.valid.data()[i]) continue;
    terms.push_back(std::abs(static_cast<double>(pred.values.data()[i]) - gt.values.data()[i]));
  }
  if (terms.empty()) throw Error(ErrorCode::EmptyValidSet, "l1: no valid ground-truth pixels");
  return pairwise_sum(terms.data(), terms.size()) / static_cast<double>(terms.size());
}

double disparity_sequence_loss(const std::vector<DisparityMap>& updates, const DisparityMap& aligned_mono,
                               const DisparityMap& final_disp, const DisparityMap& gt, const LossConfig& cfg) {
  cfg.validate();
  const int t_total = static_cast<int>(updates.size());
  double loss = 0.0;
  for (int t = 1; t <= t_total; ++t) {
    loss += std::pow(cfg.gamma_d, t_total + 2 - t) * mean_l1(updates[t - 1], gt);
  }
  loss += cfg.gamma_d * mean_l1(aligned_mono, gt);
  loss += mean_l1(final_disp, gt);
  return loss;
}

}  // namespace illusion_forge
