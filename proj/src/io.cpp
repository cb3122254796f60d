#include "illusion_forge/io.hpp"
#include "illusion_forge/error.hpp"

#include <png.h>

#include <json.hpp>

#include <algorithm>
#include <bit>
#include <cctype>
#include <cmath>
#include <csetjmp>
#include <cstring>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>
#include <unistd.h>

namespace illusion_forge {

using json = nlohmann::json;

DisparityMap DisparityMap::from_values(const Grid<float>& raw) {
  Mask valid = raw.unaryExpr([](float v) { return std::isfinite(v) && v > 0.0f; });
  Grid<float> values = valid.select(raw, 0.0f);
  return {std::move(values), std::move(valid)};
}

float DisparityMap::max_valid() const {
  float m = 0.0f;
  for (Eigen::Index i = 0; i < values.size(); ++i) {
    if (valid.data()[i]) m = std::max(m, values.data()[i]);
  }
  return m;
}

// --- files ------------------------------------------------------------------

void write_file_atomic(const fs::path& path, const std::vector<std::uint8_t>& bytes) {
  const fs::path dir = path.has_parent_path() ? path.parent_path() : fs::path(".");
  const fs::path tmp = dir / ("." + path.filename().string() + ".tmp" + std::to_string(::getpid()));
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::Io, "cannot open for writing: " + path.string());
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    out.flush();
    if (!out) {
      std::error_code ec;
      fs::remove(tmp, ec);
      throw Error(ErrorCode::Io, "write failed: " + path.string());
    }
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw Error(ErrorCode::Io, "cannot move artifact into place: " + path.string());
  }
}

void write_file_atomic(const fs::path& path, const std::string& text) {
  write_file_atomic(path, std::vector<std::uint8_t>(text.begin(), text.end()));
}

std::vector<std::uint8_t> read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open: " + path.string());
  return std::vector<std::uint8_t>(std::istreambuf_iterator<char>(in), {});
}

// --- PFM ----------------------------------------------------------------------

namespace {

struct HeaderCursor {
  const std::vector<std::uint8_t>& bytes;
  std::size_t pos = 0;

  void skip_space() {
    while (pos < bytes.size() && std::isspace(bytes[pos])) ++pos;
  }
  std::string token() {
    skip_space();
    std::string t;
    while (pos < bytes.size() && !std::isspace(bytes[pos])) t.push_back(static_cast<char>(bytes[pos++]));
    if (t.empty()) throw Error(ErrorCode::MalformedHeader, "pfm: unexpected end of header");
    return t;
  }
};

std::uint32_t byteswap32(std::uint32_t x) {
  return (x >> 24) | ((x >> 8) & 0xff00u) | ((x << 8) & 0xff0000u) | (x << 24);
}

long parse_long(const std::string& t) {
  std::size_t used = 0;
  long v = 0;
  try {
    v = std::stol(t, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != t.size()) throw Error(ErrorCode::MalformedHeader, "pfm: bad integer '" + t + "'");
  return v;
}

}  // namespace

Grid<float> decode_pfm(const std::vector<std::uint8_t>& bytes) {
  HeaderCursor cur{bytes};
  const std::string magic = cur.token();
  if (magic == "PF") throw Error(ErrorCode::ChannelCount, "pfm: 3-channel files are not supported");
  if (magic != "Pf") throw Error(ErrorCode::MalformedHeader, "pfm: bad magic '" + magic + "'");
  const long w = parse_long(cur.token());
  const long h = parse_long(cur.token());
  if (w <= 0 || h <= 0) throw Error(ErrorCode::MalformedHeader, "pfm: non-positive dimensions");
  const std::string scale_token = cur.token();
  double scale = 0.0;
  try {
    std::size_t used = 0;
    scale = std::stod(scale_token, &used);
    if (used != scale_token.size()) scale = 0.0;
  } catch (const std::exception&) {
    scale = 0.0;
  }
  if (scale == 0.0 || !std::isfinite(scale)) {
    throw Error(ErrorCode::MalformedHeader, "pfm: bad scale '" + scale_token + "'");
  }
  // exactly one whitespace byte separates the header from the payload
  if (cur.pos >= bytes.size() || !std::isspace(bytes[cur.pos])) {
    throw Error(ErrorCode::TruncatedPayload, "pfm: missing payload");
  }
  ++cur.pos;

  const std::size_t count = static_cast<std::size_t>(w) * static_cast<std::size_t>(h);
  if (bytes.size() - cur.pos < count * 4) {
    throw Error(ErrorCode::TruncatedPayload, "pfm: payload shorter than " + std::to_string(count * 4) + " bytes");
  }
  const bool file_little = scale < 0.0;
  const bool host_little = std::endian::native == std::endian::little;

  Grid<float> out(h, w);
  const std::uint8_t* payload = bytes.data() + cur.pos;
  for (long r = 0; r < h; ++r) {
    const long dst_row = h - 1 - r;
    for (long c = 0; c < w; ++c) {
      std::uint32_t word;
      std::memcpy(&word, payload + (static_cast<std::size_t>(r) * w + c) * 4, 4);
      if (file_little != host_little) word = byteswap32(word);
      out(dst_row, c) = std::bit_cast<float>(word);
    }
  }
  return out;
}

std::vector<std::uint8_t> encode_pfm(const Grid<float>& values) {
  if (values.rows() == 0 || values.cols() == 0) {
    throw Error(ErrorCode::Dimension, "pfm: cannot write an empty map");
  }
  if (!values.allFinite()) throw Error(ErrorCode::NonFinite, "pfm: map contains non-finite values");
  const std::string header =
      "Pf\n" + std::to_string(values.cols()) + " " + std::to_string(values.rows()) + "\n-1.0\n";
  std::vector<std::uint8_t> out(header.begin(), header.end());
  out.reserve(header.size() + values.size() * 4);
  const bool host_little = std::endian::native == std::endian::little;
  for (Eigen::Index r = values.rows() - 1; r >= 0; --r) {
    for (Eigen::Index c = 0; c < values.cols(); ++c) {
      std::uint32_t word = std::bit_cast<std::uint32_t>(values(r, c));
      if (!host_little) word = byteswap32(word);
      std::uint8_t b[4];
      std::memcpy(b, &word, 4);
      out.insert(out.end(), b, b + 4);
    }
  }
  return out;
}

Grid<float> read_pfm(const fs::path& path) { return decode_pfm(read_file(path)); }

void write_pfm(const Grid<float>& values, const fs::path& path) {
  write_file_atomic(path, encode_pfm(values));
}

void write_pfm(const DisparityMap& disp, const fs::path& path) {
  write_pfm(Grid<float>(disp.valid.select(disp.values, 0.0f)), path);
}

DepthMap read_pfm_depth(const fs::path& path) {
  Grid<float> v = read_pfm(path);
  v = v.unaryExpr([](float x) { return std::isfinite(x) && x > 0.0f ? x : 0.0f; });
  return DepthMap(std::move(v));
}

// --- PNG ----------------------------------------------------------------------

namespace {

struct PngErrorState {
  char message[256] = {0};
};

void png_error_fn(png_structp png, png_const_charp msg) {
  auto* state = static_cast<PngErrorState*>(png_get_error_ptr(png));
  std::snprintf(state->message, sizeof(state->message), "%s", msg);
  png_longjmp(png, 1);
}

void png_warning_fn(png_structp, png_const_charp) {}

struct ReadCursor {
  const std::uint8_t* data;
  std::size_t size;
  std::size_t pos;
};

void png_read_fn(png_structp png, png_bytep out, png_size_t n) {
  auto* cur = static_cast<ReadCursor*>(png_get_io_ptr(png));
  if (cur->pos + n > cur->size) png_error(png, "unexpected end of PNG data");
  std::memcpy(out, cur->data + cur->pos, n);
  cur->pos += n;
}

void png_write_fn(png_structp png, png_bytep data, png_size_t n) {
  auto* out = static_cast<std::vector<std::uint8_t>*>(png_get_io_ptr(png));
  out->insert(out->end(), data, data + n);
}

void png_flush_fn(png_structp) {}

// Only trivially destructible locals live across setjmp here; `image` and
// the buffers are owned by the caller.
bool decode_png_impl(ReadCursor* cursor, PngImage* image, std::vector<std::uint8_t>* row_buffer,
                     std::vector<png_bytep>* row_ptrs, PngErrorState* err) {
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, err, png_error_fn, png_warning_fn);
  if (!png) {
    std::snprintf(err->message, sizeof(err->message), "out of memory");
    return false;
  }
  png_infop info = png_create_info_struct(png);
  if (!info || setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, info ? &info : nullptr, nullptr);
    return false;
  }
  png_set_read_fn(png, cursor, png_read_fn);
  png_read_info(png, info);

  const int color = png_get_color_type(png, info);
  int depth = png_get_bit_depth(png, info);
  if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color == PNG_COLOR_TYPE_GRAY && depth < 8) png_set_expand_gray_1_2_4_to_8(png);
  if (color & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(png);
  png_set_interlace_handling(png);
  png_read_update_info(png, info);

  image->width = static_cast<int>(png_get_image_width(png, info));
  image->height = static_cast<int>(png_get_image_height(png, info));
  image->channels = png_get_channels(png, info);
  image->bit_depth = depth = png_get_bit_depth(png, info);

  const std::size_t rowbytes = png_get_rowbytes(png, info);
  row_buffer->resize(rowbytes * image->height);
  row_ptrs->resize(image->height);
  image->samples.resize(static_cast<std::size_t>(image->width) * image->height * image->channels);
  for (int r = 0; r < image->height; ++r) (*row_ptrs)[r] = row_buffer->data() + rowbytes * r;
  png_read_image(png, row_ptrs->data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  return true;
}

}  // namespace

PngImage decode_png(const std::vector<std::uint8_t>& bytes) {
  if (bytes.size() < 8 || png_sig_cmp(bytes.data(), 0, 8) != 0) {
    throw Error(ErrorCode::MalformedHeader, "png: bad signature");
  }
  ReadCursor cursor{bytes.data(), bytes.size(), 0};
  PngImage image;
  std::vector<std::uint8_t> rows;
  std::vector<png_bytep> row_ptrs;
  PngErrorState err;
  if (!decode_png_impl(&cursor, &image, &rows, &row_ptrs, &err)) {
    throw Error(ErrorCode::MalformedHeader, std::string("png: ") + err.message);
  }
  const std::size_t per_row = static_cast<std::size_t>(image.width) * image.channels;
  const std::size_t rowbytes = rows.size() / std::max(image.height, 1);
  for (int r = 0; r < image.height; ++r) {
    const std::uint8_t* src = rows.data() + rowbytes * r;
    std::uint16_t* dst = image.samples.data() + per_row * r;
    if (image.bit_depth == 16) {
      for (std::size_t i = 0; i < per_row; ++i) dst[i] = static_cast<std::uint16_t>((src[2 * i] << 8) | src[2 * i + 1]);
    } else {
      for (std::size_t i = 0; i < per_row; ++i) dst[i] = src[i];
    }
  }
  return image;
}

namespace {

bool encode_png_impl(const PngImage* image, const std::vector<std::uint8_t>* rows,
                     std::vector<std::uint8_t>* out, PngErrorState* err) {
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, err, png_error_fn, png_warning_fn);
  if (!png) return false;
  png_infop info = png_create_info_struct(png);
  if (!info || setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, info ? &info : nullptr);
    return false;
  }
  png_set_write_fn(png, out, png_write_fn, png_flush_fn);
  png_set_IHDR(png, info, image->width, image->height, image->bit_depth,
               image->channels == 3 ? PNG_COLOR_TYPE_RGB : PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  const std::size_t rowbytes = rows->size() / image->height;
  for (int r = 0; r < image->height; ++r) {
    png_write_row(png, const_cast<png_bytep>(rows->data() + rowbytes * r));
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  return true;
}

}  // namespace

std::vector<std::uint8_t> encode_png(const PngImage& image) {
  if (image.width <= 0 || image.height <= 0) throw Error(ErrorCode::Dimension, "png: empty image");
  if (image.channels != 1 && image.channels != 3) throw Error(ErrorCode::ChannelCount, "png: 1 or 3 channels");
  if (image.bit_depth != 8 && image.bit_depth != 16) throw Error(ErrorCode::BitDepth, "png: 8 or 16 bit");
  const std::size_t n = static_cast<std::size_t>(image.width) * image.height * image.channels;
  if (image.samples.size() != n) throw Error(ErrorCode::Dimension, "png: sample count mismatch");
  std::vector<std::uint8_t> rows;
  rows.reserve(n * (image.bit_depth / 8));
  for (std::uint16_t s : image.samples) {
    if (image.bit_depth == 16) {
      rows.push_back(static_cast<std::uint8_t>(s >> 8));
      rows.push_back(static_cast<std::uint8_t>(s & 0xff));
    } else {
      rows.push_back(static_cast<std::uint8_t>(s));
    }
  }
  std::vector<std::uint8_t> out;
  PngErrorState err;
  if (!encode_png_impl(&image, &rows, &out, &err)) {
    throw Error(ErrorCode::Io, std::string("png encode: ") + err.message);
  }
  return out;
}

DisparityMap decode_png16_disparity(const std::vector<std::uint8_t>& bytes, double scale) {
  if (!(scale > 0.0)) throw Error(ErrorCode::Validation, "png16: scale must be positive");
  const PngImage img = decode_png(bytes);
  if (img.bit_depth != 16) {
    throw Error(ErrorCode::BitDepth, "png16: expected 16-bit, got " + std::to_string(img.bit_depth));
  }
  if (img.channels != 1) throw Error(ErrorCode::ChannelCount, "png16: expected a single channel");
  DisparityMap out = DisparityMap::invalid(img.height, img.width);
  for (int r = 0; r < img.height; ++r) {
    for (int c = 0; c < img.width; ++c) {
      const std::uint16_t s = img.samples[static_cast<std::size_t>(r) * img.width + c];
      if (s == 0) continue;
      out.values(r, c) = static_cast<float>(s / scale);
      out.valid(r, c) = true;
    }
  }
  return out;
}

std::vector<std::uint8_t> encode_png16_disparity(const DisparityMap& disp, double scale) {
  if (!(scale > 0.0)) throw Error(ErrorCode::Validation, "png16: scale must be positive");
  if (disp.width() == 0 || disp.height() == 0) throw Error(ErrorCode::Dimension, "png16: empty map");
  PngImage img{disp.width(), disp.height(), 1, 16, {}};
  img.samples.resize(static_cast<std::size_t>(img.width) * img.height, 0);
  for (int r = 0; r < img.height; ++r) {
    for (int c = 0; c < img.width; ++c) {
      if (!disp.valid(r, c)) continue;
      const double d = disp.values(r, c);
      if (!std::isfinite(d)) throw Error(ErrorCode::NonFinite, "png16: non-finite disparity");
      const double stored = std::round(d * scale);
      if (stored < 1.0 || stored > 65535.0) {
        throw Error(ErrorCode::Validation,
                    "png16: disparity " + std::to_string(d) + " not representable at scale " + std::to_string(scale));
      }
      img.samples[static_cast<std::size_t>(r) * img.width + c] = static_cast<std::uint16_t>(stored);
    }
  }
  return encode_png(img);
}

DisparityMap read_png16_disparity(const fs::path& path, double scale) {
  return decode_png16_disparity(read_file(path), scale);
}

void write_png16_disparity(const DisparityMap& disp, const fs::path& path, double scale) {
  write_file_atomic(path, encode_png16_disparity(disp, scale));
}

RgbImage read_rgb_png(const fs::path& path) {
  const PngImage img = decode_png(read_file(path));
  RgbImage out(img.width, img.height);
  const int shift = img.bit_depth == 16 ? 8 : 0;
  for (std::size_t i = 0; i < static_cast<std::size_t>(img.width) * img.height; ++i) {
    for (int ch = 0; ch < 3; ++ch) {
      const std::uint16_t s = img.channels == 3 ? img.samples[i * 3 + ch] : img.samples[i];
      out.samples[i * 3 + ch] = static_cast<std::uint8_t>(s >> shift);
    }
  }
  return out;
}

std::vector<std::uint8_t> encode_rgb_png(const RgbImage& image) {
  PngImage img{image.width, image.height, 3, 8, {}};
  img.samples.assign(image.samples.begin(), image.samples.end());
  return encode_png(img);
}

void write_rgb_png(const RgbImage& image, const fs::path& path) {
  write_file_atomic(path, encode_rgb_png(image));
}

Grid<std::uint8_t> read_gray8_png(const fs::path& path) {
  const PngImage img = decode_png(read_file(path));
  if (img.bit_depth != 8) throw Error(ErrorCode::BitDepth, "expected an 8-bit PNG: " + path.string());
  if (img.channels != 1) throw Error(ErrorCode::ChannelCount, "expected a single-channel PNG: " + path.string());
  Grid<std::uint8_t> out(img.height, img.width);
  for (Eigen::Index i = 0; i < out.size(); ++i) out.data()[i] = static_cast<std::uint8_t>(img.samples[i]);
  return out;
}

std::vector<std::uint8_t> encode_gray8_png(const Grid<std::uint8_t>& image) {
  PngImage img{static_cast<int>(image.cols()), static_cast<int>(image.rows()), 1, 8, {}};
  img.samples.assign(image.data(), image.data() + image.size());
  return encode_png(img);
}

void write_gray8_png(const Grid<std::uint8_t>& image, const fs::path& path) {
  write_file_atomic(path, encode_gray8_png(image));
}

void write_mask_png(const Mask& mask, const fs::path& path) {
  write_gray8_png(mask.select(Grid<std::uint8_t>::Constant(mask.rows(), mask.cols(), 255),
                              Grid<std::uint8_t>::Zero(mask.rows(), mask.cols())),
                  path);
}

ConfidenceMap read_confidence(const fs::path& path) {
  if (path.extension() == ".pfm") {
    Grid<float> v = read_pfm(path);
    if ((v < 0.0f).any() || (v > 1.0f).any()) {
      throw Error(ErrorCode::Validation, "confidence values must lie in [0, 1]");
    }
    return ConfidenceMap::dense(std::move(v));
  }
  const PngImage img = decode_png(read_file(path));
  if (img.channels != 1) throw Error(ErrorCode::ChannelCount, "confidence PNG must be single channel");
  const float max_code = img.bit_depth == 16 ? 65535.0f : 255.0f;
  Grid<float> v(img.height, img.width);
  for (Eigen::Index i = 0; i < v.size(); ++i) v.data()[i] = img.samples[i] / max_code;
  return ConfidenceMap::dense(std::move(v));
}

DisparityMap read_disparity(const fs::path& path) {
  const auto ext = path.extension().string();
  if (ext == ".pfm") return read_pfm_disparity(path);
  if (ext == ".png") return read_png16_disparity(path);
  throw Error(ErrorCode::Validation, "unsupported disparity format: " + path.string());
}

void write_disparity(const DisparityMap& disp, const fs::path& path) {
  const auto ext = path.extension().string();
  if (ext == ".pfm") return write_pfm(disp, path);
  if (ext == ".png") return write_png16_disparity(disp, path);
  throw Error(ErrorCode::Validation, "unsupported disparity format: " + path.string());
}

DepthMap read_depth(const fs::path& path) {
  const auto ext = path.extension().string();
  if (ext == ".pfm") return read_pfm_depth(path);
  if (ext == ".png") {
    // 16-bit millimetre depth, the common RGB-D convention
    const PngImage img = decode_png(read_file(path));
    if (img.bit_depth != 16 || img.channels != 1) {
      throw Error(ErrorCode::BitDepth, "depth PNG must be 16-bit single channel");
    }
    Grid<float> v(img.height, img.width);
    for (Eigen::Index i = 0; i < v.size(); ++i) v.data()[i] = img.samples[i] / 1000.0f;
    return DepthMap(std::move(v));
  }
  throw Error(ErrorCode::Validation, "unsupported depth format: " + path.string());
}

// --- calibration --------------------------------------------------------------

namespace {

const json& require(const json& obj, const char* key) {
  if (!obj.is_object() || !obj.contains(key)) {
    throw Error(ErrorCode::MissingKey, std::string("calibration: missing key '") + key + "'");
  }
  return obj.at(key);
}

Intrinsicsd parse_intrinsics(const json& j) {
  Intrinsicsd k;
  k.fx = require(j, "fx").get<double>();
  k.fy = require(j, "fy").get<double>();
  k.cx = require(j, "cx").get<double>();
  k.cy = require(j, "cy").get<double>();
  k.width = require(j, "width").get<int>();
  k.height = require(j, "height").get<int>();
  return k;
}

json intrinsics_json(const Intrinsicsd& k) {
  return {{"fx", k.fx}, {"fy", k.fy}, {"cx", k.cx}, {"cy", k.cy}, {"width", k.width}, {"height", k.height}};
}

}  // namespace

CalibrationRig parse_calibration(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::Validation, std::string("calibration: invalid JSON: ") + e.what());
  }
  CalibrationRig rig;
  try {
    rig.left_intrinsics = parse_intrinsics(require(j, "left_intrinsics"));
    rig.lidar_intrinsics = parse_intrinsics(require(j, "lidar_intrinsics"));
    const auto r = require(j, "R").get<std::vector<double>>();
    const auto t = require(j, "T").get<std::vector<double>>();
    if (r.size() != 9) throw Error(ErrorCode::Validation, "calibration: R needs 9 values");
    if (t.size() != 3) throw Error(ErrorCode::Validation, "calibration: T needs 3 values");
    for (int i = 0; i < 9; ++i) rig.R(i / 3, i % 3) = r[i];
    rig.T = Eigen::Vector3d(t[0], t[1], t[2]);
    rig.baseline_m = require(j, "baseline_m").get<double>();
    rig.focal_px = require(j, "focal_px").get<double>();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::Validation, std::string("calibration: ") + e.what());
  }
  validate_rig(rig);
  return rig;
}

std::string calibration_to_json(const CalibrationRig& rig) {
  std::vector<double> r(9);
  for (int i = 0; i < 9; ++i) r[i] = rig.R(i / 3, i % 3);
  json j = {{"left_intrinsics", intrinsics_json(rig.left_intrinsics)},
            {"lidar_intrinsics", intrinsics_json(rig.lidar_intrinsics)},
            {"R", r},
            {"T", {rig.T.x(), rig.T.y(), rig.T.z()}},
            {"baseline_m", rig.baseline_m},
            {"focal_px", rig.focal_px}};
  return j.dump(2);
}

CalibrationRig read_calibration(const fs::path& path) {
  const auto bytes = read_file(path);
  return parse_calibration(std::string(bytes.begin(), bytes.end()));
}

// --- regions ------------------------------------------------------------------

void validate_regions(const RegionSet& regions) {
  std::set<int> present;
  for (Eigen::Index i = 0; i < regions.labels.size(); ++i) present.insert(regions.labels.data()[i]);
  std::set<int> used;
  for (const auto& p : regions.pairs) {
    for (int id : {static_cast<int>(p.illusion), static_cast<int>(p.support)}) {
      if (id == 0) throw Error(ErrorCode::Validation, "regions: id 0 is reserved for background");
      if (!present.count(id)) {
        throw Error(ErrorCode::MissingRegionId, "regions: id " + std::to_string(id) + " does not occur in labels");
      }
    }
    if (p.illusion == p.support) {
      throw Error(ErrorCode::OverlappingPairs, "regions: illusion and support ids must differ");
    }
    for (int id : {static_cast<int>(p.illusion), static_cast<int>(p.support)}) {
      if (!used.insert(id).second) {
        throw Error(ErrorCode::OverlappingPairs, "regions: id " + std::to_string(id) + " appears in two pairs");
      }
    }
  }
}

std::vector<RegionPair> parse_pairs(const std::string& json_text) {
  std::vector<RegionPair> pairs;
  try {
    const json j = json::parse(json_text);
    if (!j.is_array()) throw Error(ErrorCode::Validation, "pairs: expected a JSON list");
    for (const auto& e : j) {
      if (!e.contains("illusion") || !e.contains("support")) {
        throw Error(ErrorCode::MissingKey, "pairs: each entry needs 'illusion' and 'support'");
      }
      const int ill = e.at("illusion").get<int>();
      const int sup = e.at("support").get<int>();
      if (ill < 0 || ill > 255 || sup < 0 || sup > 255) {
        throw Error(ErrorCode::Validation, "pairs: ids must fit in 8 bits");
      }
      pairs.push_back({static_cast<std::uint8_t>(ill), static_cast<std::uint8_t>(sup)});
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::Validation, std::string("pairs: ") + e.what());
  }
  return pairs;
}

std::string pairs_to_json(const std::vector<RegionPair>& pairs) {
  json j = json::array();
  for (const auto& p : pairs) j.push_back({{"illusion", p.illusion}, {"support", p.support}});
  return j.dump() + "\n";
}

RegionSet read_regions(const fs::path& labels_png, const fs::path& pairs_json) {
  RegionSet regions;
  regions.labels = read_gray8_png(labels_png);
  const auto bytes = read_file(pairs_json);
  regions.pairs = parse_pairs(std::string(bytes.begin(), bytes.end()));
  validate_regions(regions);
  return regions;
}

}  // namespace illusion_forge
