#pragma once

// Grayscale PNG heatmaps of 2D fields. Axis 0 runs left to right and axis 1
// bottom to top; black is the minimum, white the maximum.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include "tumorlab/spectral.hpp"

namespace tumorlab {

struct RenderOptions {
  /// Colour range; the field's own min and max by default.
  std::optional<double> vmin;
  std::optional<double> vmax;
  /// Each node becomes a scale x scale block of pixels.
  int scale = 1;
};

struct Heatmap {
  int width = 0;
  int height = 0;
  /// Row-major, top row first.
  std::vector<std::uint8_t> pixels;
  double min = 0.0;
  double max = 0.0;
};

/// Throws std::invalid_argument unless the field is 2D.
Heatmap make_heatmap(const Field& field, const RenderOptions& opts = {});

/// PNG bytes of a heatmap; identical input gives identical bytes.
std::vector<std::uint8_t> encode_png(const Heatmap& map);

/// Writes `png` and a sidecar `<stem>.range.txt` beside it holding min and max.
/// Returns the sidecar path.
std::filesystem::path render_heatmap(const Field& field, const std::filesystem::path& png,
                                     const RenderOptions& opts = {});

}  // namespace tumorlab
