#include "illusion_forge/service.hpp"
#include "illusion_forge/error.hpp"
#include "illusion_forge/parallel.hpp"
#include "illusion_forge/rectification.hpp"

#include <httplib.h>
#include <json.hpp>

#include <algorithm>
#include <cstdio>
#include <deque>
#include <mutex>
#include <unordered_map>

namespace illusion_forge {

namespace {

using json = nlohmann::json;

constexpr std::size_t kPreviewCacheSize = 64;

std::optional<fs::path> existing(const fs::path& p) {
  if (fs::is_regular_file(p)) return p;
  return std::nullopt;
}

Polygon parse_polygon(const json& j, const char* key) {
  if (!j.contains(key)) throw Error(ErrorCode::MissingKey, std::string("missing ") + key);
  Polygon poly;
  for (const auto& v : j.at(key)) {
    if (v.is_array() && v.size() == 2) {
      poly.push_back({v[0].get<double>(), v[1].get<double>()});
    } else if (v.is_object()) {
      poly.push_back({v.at("x").get<double>(), v.at("y").get<double>()});
    } else {
      throw Error(ErrorCode::Validation, std::string(key) + ": vertices must be [x, y] or {x, y}");
    }
  }
  if (poly.size() < 3) throw Error(ErrorCode::Validation, std::string(key) + ": at least 3 vertices required");
  return poly;
}

std::string fnv1a_hex(const std::string& text) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::pair<float, float> value_range(const DisparityMap& disp) {
  float lo = std::numeric_limits<float>::infinity(), hi = -lo;
  for (Eigen::Index i = 0; i < disp.values.size(); ++i) {
    if (!disp.valid(i)) continue;
    lo = std::min(lo, disp.values(i));
    hi = std::max(hi, disp.values(i));
  }
  if (lo > hi) lo = hi = 0.0f;
  return {lo, hi};
}

std::vector<std::uint8_t> preview_png(const DisparityMap& disp, float lo, float hi) {
  return encode_rgb_png(colorize(disp.values, disp.valid, lo, hi));
}

std::vector<std::uint8_t> disparity_pfm_bytes(const DisparityMap& disp) {
  return encode_pfm(Grid<float>(disp.valid.select(disp.values, 0.0f)));
}

std::string as_body(const std::vector<std::uint8_t>& bytes) { return {bytes.begin(), bytes.end()}; }

struct FitOutcome {
  RegionSet regions;
  PlaneFitResult fit;
  DisparityMap rectified;
};

FitOutcome run_fit(const DisparityMap& disp, const FitRequest& req) {
  FitOutcome o;
  o.regions = regions_from_polygons(req, disp.height(), disp.width());
  o.fit = fit_support_region(disp, o.regions, 0, req.ransac);
  o.rectified = apply_plane(disp, o.regions.mask_of(o.regions.pairs[0].illusion), o.fit.plane, req.feather_px,
                            req.ransac.min_delta);
  return o;
}

}  // namespace

std::vector<FrameRecord> scan_frames(const fs::path& data_dir) {
  if (!fs::is_directory(data_dir)) throw Error(ErrorCode::Io, "not a directory: " + data_dir.string());
  std::vector<FrameRecord> frames;
  for (const auto& entry : fs::directory_iterator(data_dir)) {
    if (!entry.is_directory()) continue;
    const fs::path dir = entry.path();
    auto left = existing(dir / "left.png");
    auto disp = existing(dir / "disparity.pfm");
    if (!disp) disp = existing(dir / "disparity.png");
    if (!left || !disp) continue;
    FrameRecord rec{dir.filename().string(), *left, *disp, existing(dir / "labels.png"),
                    existing(dir / "pairs.json"), {}};
    for (const char* stage : {"rectified.pfm", "right.png", "holes.png"}) {
      if (auto p = existing(dir / stage)) rec.derived.emplace(fs::path(stage).stem().string(), *p);
    }
    frames.push_back(std::move(rec));
  }
  std::sort(frames.begin(), frames.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
  return frames;
}

FitRequest parse_fit_request(const std::string& body) {
  json j;
  try {
    j = json::parse(body);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::Validation, std::string("request body is not JSON: ") + e.what());
  }
  if (!j.is_object()) throw Error(ErrorCode::Validation, "request body must be a JSON object");
  FitRequest req;
  try {
    req.support_polygon = parse_polygon(j, "support_polygon");
    req.illusion_polygon = parse_polygon(j, "illusion_polygon");
    req.ransac.inlier_threshold = j.value("tau_d", req.ransac.inlier_threshold);
    req.ransac.max_iterations = j.value("iters", req.ransac.max_iterations);
    req.ransac.batch_size = j.value("batch", req.ransac.batch_size);
    req.ransac.seed = j.value("seed", req.ransac.seed);
    req.feather_px = j.value("feather_px", req.feather_px);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::Validation, std::string("bad request field: ") + e.what());
  }
  req.ransac.validate();
  if (!(req.feather_px >= 0.0)) throw Error(ErrorCode::Validation, "feather_px must be >= 0");
  return req;
}

RegionSet regions_from_polygons(const FitRequest& request, int height, int width) {
  RegionSet regions;
  regions.labels = Grid<std::uint8_t>::Zero(height, width);
  regions.labels = rasterize_polygon(request.support_polygon, height, width).select(std::uint8_t{2}, regions.labels);
  regions.labels = rasterize_polygon(request.illusion_polygon, height, width).select(std::uint8_t{1}, regions.labels);
  regions.pairs = {{1, 2}};
  return regions;
}

struct AnnotationService::Impl {
  fs::path data_dir;
  httplib::Server server;
  std::mutex preview_mutex;
  std::unordered_map<std::string, std::string> previews;
  std::deque<std::string> preview_order;
  std::mutex export_mutex;
  std::unordered_map<std::string, std::unique_ptr<std::mutex>> frame_locks;

  explicit Impl(fs::path dir) : data_dir(std::move(dir)) { routes(); }

  FrameRecord frame(const std::string& id) const {
    for (auto& f : scan_frames(data_dir))
      if (f.id == id) return f;
    throw Error(ErrorCode::UnknownFrame, "unknown frame: " + id);
  }

  std::mutex& frame_lock(const std::string& id) {
    std::lock_guard lock(export_mutex);
    auto& slot = frame_locks[id];
    if (!slot) slot = std::make_unique<std::mutex>();
    return *slot;
  }

  void store_preview(const std::string& id, std::string png) {
    std::lock_guard lock(preview_mutex);
    if (previews.emplace(id, std::move(png)).second) {
      preview_order.push_back(id);
      if (preview_order.size() > kPreviewCacheSize) {
        previews.erase(preview_order.front());
        preview_order.pop_front();
      }
    }
  }

  template <class Handler>
  auto guarded(Handler h) {
    return [h](const httplib::Request& req, httplib::Response& res) {
      try {
        h(req, res);
      } catch (const Error& e) {
        int status = 422;
        if (e.code() == ErrorCode::UnknownFrame) status = 404;
        else if (e.code() == ErrorCode::Validation || e.code() == ErrorCode::MissingKey) status = 400;
        res.status = status;
        res.set_content(json{{"error", e.what()}, {"code", to_string(e.code())}}.dump(), "application/json");
      } catch (const std::exception& e) {
        res.status = 500;
        res.set_content(json{{"error", e.what()}}.dump(), "application/json");
      }
    };
  }

  void routes() {
    server.new_task_queue = [] { return new httplib::ThreadPool(std::max(2, default_thread_count())); };

    server.Get("/api/frames", guarded([this](const httplib::Request&, httplib::Response& res) {
                 json ids = json::array();
                 for (const auto& f : scan_frames(data_dir)) ids.push_back(f.id);
                 res.set_content(ids.dump(), "application/json");
               }));

    server.Get(R"(/api/frame/([^/]+)/image)", guarded([this](const httplib::Request& req, httplib::Response& res) {
                 const FrameRecord f = frame(req.matches[1]);
                 res.set_content(as_body(read_file(f.left_image)), "image/png");
               }));

    server.Get(R"(/api/frame/([^/]+)/disparity)",
               guarded([this](const httplib::Request& req, httplib::Response& res) {
                 const FrameRecord f = frame(req.matches[1]);
                 const DisparityMap disp = read_disparity(f.disparity);
                 if (req.has_param("raw") && req.get_param_value("raw") != "0") {
                   res.set_content(as_body(disparity_pfm_bytes(disp)), "application/octet-stream");
                   return;
                 }
                 const auto [lo, hi] = value_range(disp);
                 res.set_header("X-Disparity-Min", std::to_string(lo));
                 res.set_header("X-Disparity-Max", std::to_string(hi));
                 res.set_content(as_body(preview_png(disp, lo, hi)), "image/png");
               }));

    server.Post(R"(/api/frame/([^/]+)/fit)", guarded([this](const httplib::Request& req, httplib::Response& res) {
                  const std::string id = req.matches[1];
                  const FrameRecord f = frame(id);
                  const FitRequest fit_req = parse_fit_request(req.body);
                  const DisparityMap disp = read_disparity(f.disparity);
                  const FitOutcome o = run_fit(disp, fit_req);
                  const auto [lo, hi] = value_range(o.rectified);
                  const std::string preview_id = fnv1a_hex(id + "\n" + req.body);
                  store_preview(preview_id, as_body(preview_png(o.rectified, lo, hi)));
                  const std::size_t support = o.fit.inlier_mask.size();
                  const json body = {
                      {"plane", json::parse(plane_json(o.fit))},
                      {"inlier_ratio", support ? double(o.fit.inlier_count) / double(support) : 0.0},
                      {"rms", o.fit.rms_residual},
                      {"preview_id", preview_id},
                      {"min", lo},
                      {"max", hi}};
                  res.set_content(body.dump(), "application/json");
                }));

    server.Get(R"(/api/preview/([0-9a-f]+))", [this](const httplib::Request& req, httplib::Response& res) {
      std::lock_guard lock(preview_mutex);
      auto it = previews.find(req.matches[1]);
      if (it == previews.end()) {
        res.status = 404;
        res.set_content(json{{"error", "unknown preview"}}.dump(), "application/json");
        return;
      }
      res.set_content(it->second, "image/png");
    });

    server.Post(R"(/api/frame/([^/]+)/export)", guarded([this](const httplib::Request& req, httplib::Response& res) {
                  const std::string id = req.matches[1];
                  const FrameRecord f = frame(id);
                  const FitRequest fit_req = parse_fit_request(req.body);
                  const FitOutcome o = run_fit(read_disparity(f.disparity), fit_req);
                  const fs::path dir = f.left_image.parent_path();
                  const std::vector<std::pair<fs::path, std::vector<std::uint8_t>>> outputs = {
                      {dir / "labels.png", encode_gray8_png(o.regions.labels)},
                      {dir / "pairs.json", [&] {
                         const std::string text = pairs_to_json(o.regions.pairs);
                         return std::vector<std::uint8_t>(text.begin(), text.end());
                       }()},
                      {dir / "rectified.pfm", disparity_pfm_bytes(o.rectified)}};
                  std::lock_guard lock(frame_lock(id));
                  bool unchanged = true;
                  json written = json::array();
                  for (const auto& [path, bytes] : outputs) {
                    if (!fs::exists(path) || read_file(path) != bytes) unchanged = false;
                    write_file_atomic(path, bytes);
                    written.push_back(path.string());
                  }
                  res.set_content(json{{"written", written}, {"unchanged", unchanged}}.dump(), "application/json");
                }));
  }
};

AnnotationService::AnnotationService(fs::path data_dir) : impl_(std::make_unique<Impl>(std::move(data_dir))) {
  if (!fs::is_directory(impl_->data_dir))
    throw Error(ErrorCode::Io, "data directory not found: " + impl_->data_dir.string());
}

AnnotationService::~AnnotationService() { stop(); }

void AnnotationService::listen(const std::string& host, int port) {
  if (!impl_->server.listen(host, port))
    throw Error(ErrorCode::Io, "cannot listen on " + host + ":" + std::to_string(port));
}

int AnnotationService::bind_any_port(const std::string& host) {
  const int port = impl_->server.bind_to_any_port(host);
  if (port < 0) throw Error(ErrorCode::Io, "cannot bind " + host);
  return port;
}

void AnnotationService::listen_after_bind() { impl_->server.listen_after_bind(); }

void AnnotationService::wait_until_ready() const { impl_->server.wait_until_ready(); }

void AnnotationService::stop() {
  if (impl_) impl_->server.stop();
}

}  // namespace illusion_forge
