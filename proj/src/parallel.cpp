#include "illusion_forge/parallel.hpp"
#include "illusion_forge/error.hpp"

#include <algorithm>
#include <cstdlib>
#include <string>
#include <thread>
#include <vector>

namespace illusion_forge {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::Io: return "io";
    case ErrorCode::MalformedHeader: return "malformed_header";
    case ErrorCode::ChannelCount: return "channel_count";
    case ErrorCode::TruncatedPayload: return "truncated_payload";
    case ErrorCode::Dimension: return "dimension";
    case ErrorCode::NonFinite: return "non_finite";
    case ErrorCode::BitDepth: return "bit_depth";
    case ErrorCode::MissingKey: return "missing_key";
    case ErrorCode::NotOrthonormal: return "not_orthonormal";
    case ErrorCode::Validation: return "validation";
    case ErrorCode::MissingRegionId: return "missing_region_id";
    case ErrorCode::OverlappingPairs: return "overlapping_pairs";
    case ErrorCode::TooFewPoints: return "too_few_points";
    case ErrorCode::DegenerateSupport: return "degenerate_support";
    case ErrorCode::DeltaDegenerate: return "delta_degenerate";
    case ErrorCode::RankDeficient: return "rank_deficient";
    case ErrorCode::NonPositiveDepth: return "non_positive_depth";
    case ErrorCode::BehindCamera: return "behind_camera";
    case ErrorCode::UndefinedScale: return "undefined_scale";
    case ErrorCode::AllHoles: return "all_holes";
    case ErrorCode::EmptyValidSet: return "empty_valid_set";
    case ErrorCode::NonPositiveRatio: return "non_positive_ratio";
    case ErrorCode::UnknownFrame: return "unknown_frame";
  }
  return "unknown";
}

int default_thread_count() {
  int hw = static_cast<int>(std::thread::hardware_concurrency());
  if (hw <= 0) hw = 1;
  if (const char* env = std::getenv("ILLUSION_FORGE_THREADS")) {
    try {
      int cap = std::stoi(env);
      if (cap > 0) return std::min(hw, cap);
    } catch (const std::exception&) {
      // ignore malformed values
    }
  }
  return hw;
}

int resolve_thread_count(int requested) {
  return requested > 0 ? requested : default_thread_count();
}

void parallel_for(std::size_t n, int threads,
                  const std::function<void(std::size_t, std::size_t)>& body) {
  if (n == 0) return;
  const std::size_t workers = std::min<std::size_t>(std::max(threads, 1), n);
  if (workers == 1) {
    body(0, n);
    return;
  }
  const std::size_t chunk = (n + workers - 1) / workers;
  std::vector<std::jthread> pool;
  pool.reserve(workers);
  std::vector<std::exception_ptr> errors(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    const std::size_t begin = w * chunk;
    const std::size_t end = std::min(n, begin + chunk);
    if (begin >= end) break;
    pool.emplace_back([&, w, begin, end] {
      try {
        body(begin, end);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  pool.clear();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

double pairwise_sum(const double* data, std::size_t n) {
  if (n <= 8) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += data[i];
    return s;
  }
  const std::size_t half = n / 2;
  return pairwise_sum(data, half) + pairwise_sum(data + half, n - half);
}

}  // namespace illusion_forge
