#include "illusion_forge/image_ops.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>

namespace illusion_forge {

namespace {

constexpr int kDr[4] = {-1, 1, 0, 0};
constexpr int kDc[4] = {0, 0, -1, 1};

}  // namespace

Mask diffuse_fill(Grid<float>& values, const Mask& fill, const Mask& known_in, int iterations, double tol) {
  const Eigen::Index h = values.rows(), w = values.cols();
  Mask known = known_in && !fill;
  Mask filled = Mask::Constant(h, w, false);

  // seeding: each layer only reads values from earlier layers
  std::vector<std::pair<Eigen::Index, Eigen::Index>> frontier;
  std::vector<float> layer_values;
  for (;;) {
    frontier.clear();
    layer_values.clear();
    for (Eigen::Index r = 0; r < h; ++r) {
      for (Eigen::Index c = 0; c < w; ++c) {
        if (!fill(r, c) || filled(r, c)) continue;
        double sum = 0.0;
        int n = 0;
        for (int k = 0; k < 4; ++k) {
          const Eigen::Index rr = r + kDr[k], cc = c + kDc[k];
          if (rr < 0 || cc < 0 || rr >= h || cc >= w) continue;
          if (known(rr, cc) || filled(rr, cc)) {
            sum += values(rr, cc);
            ++n;
          }
        }
        if (n > 0) {
          frontier.emplace_back(r, c);
          layer_values.push_back(static_cast<float>(sum / n));
        }
      }
    }
    if (frontier.empty()) break;
    for (std::size_t i = 0; i < frontier.size(); ++i) {
      values(frontier[i].first, frontier[i].second) = layer_values[i];
      filled(frontier[i].first, frontier[i].second) = true;
    }
  }

  Grid<float> next = values;
  for (int it = 0; it < iterations; ++it) {
    double max_change = 0.0;
    for (Eigen::Index r = 0; r < h; ++r) {
      for (Eigen::Index c = 0; c < w; ++c) {
        if (!filled(r, c)) continue;
        double sum = 0.0;
        int n = 0;
        for (int k = 0; k < 4; ++k) {
          const Eigen::Index rr = r + kDr[k], cc = c + kDc[k];
          if (rr < 0 || cc < 0 || rr >= h || cc >= w) continue;
          if (known(rr, cc) || filled(rr, cc)) {
            sum += values(rr, cc);
            ++n;
          }
        }
        const float v = static_cast<float>(sum / n);
        max_change = std::max(max_change, static_cast<double>(std::abs(v - values(r, c))));
        next(r, c) = v;
      }
    }
    values = filled.select(next, values);
    if (max_change < tol) break;
  }
  return filled;
}

namespace {

// Summed-area table with a zero first row/column.
struct Integral {
  Eigen::ArrayXXd table;

  explicit Integral(const Eigen::ArrayXXd& src) : table(Eigen::ArrayXXd::Zero(src.rows() + 1, src.cols() + 1)) {
    for (Eigen::Index r = 0; r < src.rows(); ++r) {
      double row_sum = 0.0;
      for (Eigen::Index c = 0; c < src.cols(); ++c) {
        row_sum += src(r, c);
        table(r + 1, c + 1) = table(r, c + 1) + row_sum;
      }
    }
  }

  double sum(Eigen::Index r0, Eigen::Index c0, Eigen::Index r1, Eigen::Index c1) const {
    return table(r1, c1) - table(r0, c1) - table(r1, c0) + table(r0, c0);
  }
};

// Box mean with the window clipped to the image.
Eigen::ArrayXXd box_mean(const Eigen::ArrayXXd& src, int radius) {
  const Integral integral(src);
  const Eigen::Index h = src.rows(), w = src.cols();
  Eigen::ArrayXXd out(h, w);
  for (Eigen::Index r = 0; r < h; ++r) {
    const Eigen::Index r0 = std::max<Eigen::Index>(0, r - radius), r1 = std::min<Eigen::Index>(h, r + radius + 1);
    for (Eigen::Index c = 0; c < w; ++c) {
      const Eigen::Index c0 = std::max<Eigen::Index>(0, c - radius), c1 = std::min<Eigen::Index>(w, c + radius + 1);
      out(r, c) = integral.sum(r0, c0, r1, c1) / static_cast<double>((r1 - r0) * (c1 - c0));
    }
  }
  return out;
}

}  // namespace

Grid<float> guided_filter(const RgbImage& guide, const Grid<float>& src, int radius, double eps) {
  const Eigen::Index h = src.rows(), w = src.cols();
  std::array<Eigen::ArrayXXd, 3> ch;
  for (int k = 0; k < 3; ++k) {
    ch[k].resize(h, w);
    for (Eigen::Index r = 0; r < h; ++r) {
      for (Eigen::Index c = 0; c < w; ++c) ch[k](r, c) = guide.at(static_cast<int>(r), static_cast<int>(c))[k] / 255.0;
    }
  }
  const Eigen::ArrayXXd p = src.cast<double>();
  std::array<Eigen::ArrayXXd, 3> mean_i, mean_ip;
  for (int k = 0; k < 3; ++k) {
    mean_i[k] = box_mean(ch[k], radius);
    mean_ip[k] = box_mean(ch[k] * p, radius);
  }
  const Eigen::ArrayXXd mean_p = box_mean(p, radius);
  std::array<std::array<Eigen::ArrayXXd, 3>, 3> mean_ii;
  for (int i = 0; i < 3; ++i) {
    for (int j = i; j < 3; ++j) {
      mean_ii[i][j] = box_mean(ch[i] * ch[j], radius);
      if (j != i) mean_ii[j][i] = mean_ii[i][j];
    }
  }

  std::array<Eigen::ArrayXXd, 3> a;
  for (auto& x : a) x.resize(h, w);
  Eigen::ArrayXXd b(h, w);
  for (Eigen::Index r = 0; r < h; ++r) {
    for (Eigen::Index c = 0; c < w; ++c) {
      Eigen::Matrix3d sigma;
      Eigen::Vector3d cov, mi;
      for (int i = 0; i < 3; ++i) {
        mi[i] = mean_i[i](r, c);
        cov[i] = mean_ip[i](r, c) - mean_i[i](r, c) * mean_p(r, c);
        for (int j = 0; j < 3; ++j) sigma(i, j) = mean_ii[i][j](r, c) - mean_i[i](r, c) * mean_i[j](r, c);
      }
      sigma.diagonal().array() += eps;
      const Eigen::Vector3d coef = sigma.ldlt().solve(cov);
      for (int i = 0; i < 3; ++i) a[i](r, c) = coef[i];
      b(r, c) = mean_p(r, c) - coef.dot(mi);
    }
  }

  Eigen::ArrayXXd q = box_mean(b, radius);
  for (int i = 0; i < 3; ++i) q += box_mean(a[i], radius) * ch[i];
  return q.cast<float>();
}

Components connected_components(const Mask& mask) {
  const Eigen::Index h = mask.rows(), w = mask.cols();
  Components out{Grid<int>::Zero(h, w), {}};
  std::vector<std::pair<Eigen::Index, Eigen::Index>> stack;
  int next = 0;
  for (Eigen::Index r = 0; r < h; ++r) {
    for (Eigen::Index c = 0; c < w; ++c) {
      if (!mask(r, c) || out.labels(r, c) != 0) continue;
      ++next;
      int area = 0;
      stack.assign(1, {r, c});
      out.labels(r, c) = next;
      while (!stack.empty()) {
        auto [pr, pc] = stack.back();
        stack.pop_back();
        ++area;
        for (int dr = -1; dr <= 1; ++dr) {
          for (int dc = -1; dc <= 1; ++dc) {
            const Eigen::Index rr = pr + dr, cc = pc + dc;
            if (rr < 0 || cc < 0 || rr >= h || cc >= w) continue;
            if (mask(rr, cc) && out.labels(rr, cc) == 0) {
              out.labels(rr, cc) = next;
              stack.emplace_back(rr, cc);
            }
          }
        }
      }
      out.areas.push_back(area);
    }
  }
  return out;
}

namespace {

// 1-D squared distance transform of a sampled function (lower envelope of
// parabolas).
void edt_1d(const std::vector<double>& f, std::vector<double>& d, std::vector<int>& v, std::vector<double>& z) {
  const int n = static_cast<int>(f.size());
  constexpr double inf = std::numeric_limits<double>::infinity();
  int k = -1;
  for (int q = 0; q < n; ++q) {
    if (f[q] == inf) continue;
    if (k < 0) {
      k = 0;
      v[0] = q;
      z[0] = -inf;
      z[1] = inf;
      continue;
    }
    double s = 0.0;
    for (;;) {
      const int p = v[k];
      s = ((f[q] + double(q) * q) - (f[p] + double(p) * p)) / (2.0 * (q - p));
      if (s > z[k]) break;
      --k;  // z[0] = -inf, so k never drops below 0
    }
    ++k;
    v[k] = q;
    z[k] = s;
    z[k + 1] = inf;
  }
  if (k < 0) {
    std::fill(d.begin(), d.end(), inf);
    return;
  }
  int j = 0;
  for (int q = 0; q < n; ++q) {
    while (z[j + 1] < q) ++j;
    const double diff = q - v[j];
    d[q] = diff * diff + f[v[j]];
  }
}

}  // namespace

Grid<double> distance_to_mask(const Mask& mask) {
  const Eigen::Index h = mask.rows(), w = mask.cols();
  constexpr double inf = std::numeric_limits<double>::infinity();
  Grid<double> sq = mask.select(Grid<double>::Zero(h, w), Grid<double>::Constant(h, w, inf));
  const Eigen::Index n = std::max(h, w);
  std::vector<double> f, d;
  std::vector<int> v(n);
  std::vector<double> z(n + 1);
  for (Eigen::Index c = 0; c < w; ++c) {
    f.assign(h, 0.0);
    d.assign(h, 0.0);
    for (Eigen::Index r = 0; r < h; ++r) f[r] = sq(r, c);
    edt_1d(f, d, v, z);
    for (Eigen::Index r = 0; r < h; ++r) sq(r, c) = d[r];
  }
  for (Eigen::Index r = 0; r < h; ++r) {
    f.assign(w, 0.0);
    d.assign(w, 0.0);
    for (Eigen::Index c = 0; c < w; ++c) f[c] = sq(r, c);
    edt_1d(f, d, v, z);
    for (Eigen::Index c = 0; c < w; ++c) sq(r, c) = d[c];
  }
  return sq.sqrt();
}

}  // namespace illusion_forge
