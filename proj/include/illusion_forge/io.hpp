#pragma once

#include "illusion_forge/camera.hpp"
#include "illusion_forge/grid.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

namespace illusion_forge {

namespace fs = std::filesystem;

/// Writes `bytes` to a sibling temp file and renames it over `path`, so a
/// reader never observes a partially written artifact.
void write_file_atomic(const fs::path& path, const std::vector<std::uint8_t>& bytes);
void write_file_atomic(const fs::path& path, const std::string& text);
std::vector<std::uint8_t> read_file(const fs::path& path);

// --- PFM ------------------------------------------------------------------

/// Single-channel PFM ("Pf"). Rows are stored bottom-to-top; a negative scale
/// means little-endian payload.
Grid<float> decode_pfm(const std::vector<std::uint8_t>& bytes);
std::vector<std::uint8_t> encode_pfm(const Grid<float>& values);

Grid<float> read_pfm(const fs::path& path);
void write_pfm(const Grid<float>& values, const fs::path& path);

inline DisparityMap read_pfm_disparity(const fs::path& path) {
  return DisparityMap::from_values(read_pfm(path));
}
/// Invalid pixels are written as 0.
void write_pfm(const DisparityMap& disp, const fs::path& path);
DepthMap read_pfm_depth(const fs::path& path);
inline void write_pfm(const DepthMap& depth, const fs::path& path) { write_pfm(depth.values, path); }

// --- PNG ------------------------------------------------------------------

/// Raw decoded PNG samples (1 or 3 channels, 8 or 16 bit) without any colour
/// or gamma conversion.
struct PngImage {
  int width = 0;
  int height = 0;
  int channels = 0;
  int bit_depth = 0;
  std::vector<std::uint16_t> samples;
};

PngImage decode_png(const std::vector<std::uint8_t>& bytes);
std::vector<std::uint8_t> encode_png(const PngImage& image);

/// KITTI-style disparity: stored = round(d * scale), stored 0 is invalid.
DisparityMap read_png16_disparity(const fs::path& path, double scale = 256.0);
void write_png16_disparity(const DisparityMap& disp, const fs::path& path, double scale = 256.0);
DisparityMap decode_png16_disparity(const std::vector<std::uint8_t>& bytes, double scale = 256.0);
std::vector<std::uint8_t> encode_png16_disparity(const DisparityMap& disp, double scale = 256.0);

RgbImage read_rgb_png(const fs::path& path);
void write_rgb_png(const RgbImage& image, const fs::path& path);
std::vector<std::uint8_t> encode_rgb_png(const RgbImage& image);

Grid<std::uint8_t> read_gray8_png(const fs::path& path);
void write_gray8_png(const Grid<std::uint8_t>& image, const fs::path& path);
std::vector<std::uint8_t> encode_gray8_png(const Grid<std::uint8_t>& image);

void write_mask_png(const Mask& mask, const fs::path& path);

/// Reads a confidence map from PFM or from an 8/16-bit grayscale PNG
/// (normalized by the maximum code value).
ConfidenceMap read_confidence(const fs::path& path);

/// Format dispatch on extension: ".pfm" or 16-bit ".png".
DisparityMap read_disparity(const fs::path& path);
void write_disparity(const DisparityMap& disp, const fs::path& path);
DepthMap read_depth(const fs::path& path);

// --- Calibration ------------------------------------------------------------

CalibrationRig parse_calibration(const std::string& json_text);
std::string calibration_to_json(const CalibrationRig& rig);
CalibrationRig read_calibration(const fs::path& path);

// --- Regions ----------------------------------------------------------------

struct RegionPair {
  std::uint8_t illusion = 0;
  std::uint8_t support = 0;
  bool operator==(const RegionPair&) const = default;
};

/// Labelled illusion/support masks. Label 0 is background.
struct RegionSet {
  Grid<std::uint8_t> labels;
  std::vector<RegionPair> pairs;

  Mask mask_of(std::uint8_t id) const { return labels == id; }
};

/// Throws MissingRegionId / OverlappingPairs when the pairing metadata is
/// inconsistent with the label grid.
void validate_regions(const RegionSet& regions);

std::vector<RegionPair> parse_pairs(const std::string& json_text);
std::string pairs_to_json(const std::vector<RegionPair>& pairs);
RegionSet read_regions(const fs::path& labels_png, const fs::path& pairs_json);

}  // namespace illusion_forge
