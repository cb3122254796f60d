#pragma once

#include "illusion_forge/io.hpp"
#include "illusion_forge/plane_fit.hpp"
#include "illusion_forge/raster.hpp"

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace illusion_forge {

/// One frame directory: `<data-dir>/<id>/left.png` plus `disparity.pfm` (or
/// a 16-bit `disparity.png`). Exports land next to them.
struct FrameRecord {
  std::string id;
  fs::path left_image;
  fs::path disparity;
  std::optional<fs::path> labels;
  std::optional<fs::path> pairs;
  std::map<std::string, fs::path> derived;
};

/// Frames of a data directory, sorted by id.
std::vector<FrameRecord> scan_frames(const fs::path& data_dir);

/// Body of /fit and /export requests.
struct FitRequest {
  Polygon support_polygon;
  Polygon illusion_polygon;
  RansacConfig ransac;
  double feather_px = 8.0;
};

FitRequest parse_fit_request(const std::string& body);

/// Label grid for one annotated pair: support = 2, illusion = 1 (illusion
/// wins where the polygons overlap), with pairs [{1, 2}]. Either id may be
/// absent when its polygon covers no pixel centre.
RegionSet regions_from_polygons(const FitRequest& request, int height, int width);

/// HTTP service for the annotation UI. Stateless over the data directory
/// except for the in-memory preview cache.
class AnnotationService {
 public:
  explicit AnnotationService(fs::path data_dir);
  ~AnnotationService();
  AnnotationService(const AnnotationService&) = delete;
  AnnotationService& operator=(const AnnotationService&) = delete;

  /// Blocks until `stop()`. Throws if the port cannot be bound.
  void listen(const std::string& host, int port);
  /// Binds an ephemeral port and returns it; call `listen_after_bind()` next.
  int bind_any_port(const std::string& host);
  void listen_after_bind();
  void wait_until_ready() const;
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace illusion_forge
