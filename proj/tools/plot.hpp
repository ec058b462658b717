// SPDX-License-Identifier: Apache-2.0
//
// Diagnostic rasters: birth-persistence scatter plots of diagrams and tiled
// persistence-image heatmaps of descriptors.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "slicetopo/error.hpp"
#include "slicetopo/topology.hpp"

namespace slicetopo::plot {

struct Raster {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> rgb;  // row-major, 3 bytes per pixel

  Raster(int w, int h) : width(w), height(h), rgb(static_cast<std::size_t>(w) * h * 3, 255) {}

  void set(int x, int y, std::array<std::uint8_t, 3> c) {
    if (x < 0 || y < 0 || x >= width || y >= height) return;
    std::copy(c.begin(), c.end(), rgb.begin() + (static_cast<std::ptrdiff_t>(y) * width + x) * 3);
  }
  std::array<std::uint8_t, 3> at(int x, int y) const {
    const auto* p = rgb.data() + (static_cast<std::ptrdiff_t>(y) * width + x) * 3;
    return {p[0], p[1], p[2]};
  }
};

inline constexpr std::array<std::uint8_t, 3> kBlack{0, 0, 0};
inline constexpr std::array<std::uint8_t, 3> kGrey{200, 200, 200};
inline constexpr std::array<std::uint8_t, 3> kMarker{200, 30, 30};

/// Scatter of (birth, persistence) with the origin at the lower-left corner of
/// the axes box. Both axes start at 0 and end at 1.1 x the largest value (1 if none).
struct DiagramPlot {
  static constexpr int kSize = 400;
  static constexpr int kMargin = 40;
  double birth_max = 1.0;
  double pers_max = 1.0;

  int px(double birth) const {
    return kMargin + static_cast<int>(std::lround(birth / birth_max * (kSize - 2 * kMargin)));
  }
  int py(double pers) const {
    return kSize - kMargin - static_cast<int>(std::lround(pers / pers_max * (kSize - 2 * kMargin)));
  }
};

inline std::pair<Raster, DiagramPlot> plot_diagram(const PersistenceDiagram& pd) {
  DiagramPlot frame;
  double b = 0.0, p = 0.0;
  for (const auto& pt : pd.points) {
    b = std::max(b, pt.birth);
    p = std::max(p, pt.persistence());
  }
  if (b > 0.0) frame.birth_max = 1.1 * b;
  if (p > 0.0) frame.pers_max = 1.1 * p;

  Raster img(DiagramPlot::kSize, DiagramPlot::kSize);
  const int lo = DiagramPlot::kMargin, hi = DiagramPlot::kSize - DiagramPlot::kMargin;
  for (int i = lo; i <= hi; ++i) {
    img.set(i, hi, kBlack);  // birth axis
    img.set(lo, i, kBlack);  // persistence axis
  }
  for (int t = 1; t <= 4; ++t) {
    const int off = lo + t * (hi - lo) / 4;
    for (int k = 1; k <= 5; ++k) {
      img.set(off, hi + k, kBlack);
      img.set(lo - k, DiagramPlot::kSize - off, kBlack);
    }
  }
  for (const auto& pt : pd.points) {
    const int x = frame.px(pt.birth), y = frame.py(pt.persistence());
    for (int dy = -3; dy <= 3; ++dy)
      for (int dx = -3; dx <= 3; ++dx) img.set(x + dx, y + dy, kMarker);
  }
  return {std::move(img), frame};
}

/// One heatmap tile per block of `rows * cols` values, left to right, with
/// persistence increasing upwards. Shared intensity scale across tiles.
inline Raster plot_descriptor(std::span<const double> values, int rows, int cols, int scale = 8) {
  const std::size_t block = static_cast<std::size_t>(rows) * cols;
  if (rows <= 0 || cols <= 0 || block == 0 || values.size() % block != 0)
    throw Error(ErrorCode::kParseError, "descriptor length is not a multiple of the image size");
  const int tiles = static_cast<int>(values.size() / block);
  constexpr int kGap = 4;
  const int tw = cols * scale, th = rows * scale;
  Raster img(std::max(1, tiles * (tw + kGap) + kGap), th + 2 * kGap);
  const double top = values.empty() ? 0.0 : *std::max_element(values.begin(), values.end());
  for (int t = 0; t < tiles; ++t) {
    const int x0 = kGap + t * (tw + kGap);
    for (int r = 0; r < rows; ++r)
      for (int c = 0; c < cols; ++c) {
        const double v = values[static_cast<std::size_t>(t) * block + static_cast<std::size_t>(r) * cols + c];
        const double u = top > 0.0 ? std::clamp(v / top, 0.0, 1.0) : 0.0;
        const std::array<std::uint8_t, 3> color{static_cast<std::uint8_t>(std::lround(255 * u)),
                                                static_cast<std::uint8_t>(std::lround(80 * u)),
                                                static_cast<std::uint8_t>(std::lround(255 * (1.0 - u)))};
        for (int dy = 0; dy < scale; ++dy)
          for (int dx = 0; dx < scale; ++dx) img.set(x0 + c * scale + dx, kGap + (rows - 1 - r) * scale + dy, color);
      }
    for (int y = 0; y < th + 2 * kGap; ++y) img.set(x0 + tw + kGap / 2, y, kGrey);
  }
  return img;
}

}  // namespace slicetopo::plot
