// SPDX-License-Identifier: Apache-2.0
//
// Persistence images and stacked, zero-padded object descriptors.

#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "slicetopo/error.hpp"
#include "slicetopo/topology.hpp"

namespace slicetopo {

enum class PiWeighting : std::uint8_t { kLinearPersistence, kConstant };

struct PiParams {
  int rows = 16;  // persistence axis
  int cols = 16;  // birth axis
  double birth_lo = 0.0;
  double birth_hi = 1.0;
  double pers_lo = 0.0;
  double pers_hi = 1.0;
  double bandwidth = 1.0 / 16.0;
  PiWeighting weighting = PiWeighting::kLinearPersistence;

  /// 16x16 grid, bandwidth = pers_hi / 16, linear persistence weighting.
  static PiParams with_ranges(double birth_hi, double pers_hi) {
    PiParams p;
    p.birth_hi = birth_hi;
    p.pers_hi = pers_hi;
    p.bandwidth = pers_hi / 16.0;
    return p;
  }

  int size() const { return rows * cols; }
  double birth_step() const { return (birth_hi - birth_lo) / cols; }
  double pers_step() const { return (pers_hi - pers_lo) / rows; }

  void validate() const {
    if (rows <= 0 || cols <= 0) throw Error(ErrorCode::kInvalidParams, "persistence image grid must be positive");
    if (!(bandwidth > 0.0)) throw Error(ErrorCode::kInvalidParams, "bandwidth must be positive");
    if (!(birth_hi > birth_lo) || !(pers_hi > pers_lo))
      throw Error(ErrorCode::kInvalidParams, "persistence image ranges must satisfy hi > lo");
  }
  friend bool operator==(const PiParams&, const PiParams&) = default;
};

/// Row-major image; row r covers persistence, column c covers birth.
struct PersistenceImage {
  int rows = 0;
  int cols = 0;
  std::vector<double> values;

  double at(int r, int c) const { return values[static_cast<std::size_t>(r) * cols + c]; }
  double sum() const {
    double s = 0.0;
    for (double v : values) s += v;
    return s;
  }
};

inline double pi_weight(double persistence, const PiParams& params) {
  return params.weighting == PiWeighting::kConstant ? 1.0 : persistence / params.pers_hi;
}

/// Gaussian-smoothed birth-persistence density sampled at cell centers.
/// Points outside the ranges are clamped onto the range boundary.
inline PersistenceImage persistence_image(const PersistenceDiagram& pd, const PiParams& params) {
  params.validate();
  PersistenceImage img{params.rows, params.cols, std::vector<double>(static_cast<std::size_t>(params.size()), 0.0)};
  if (pd.points.empty()) return img;

  std::vector<PersistencePair> pts = pd.points;
  std::sort(pts.begin(), pts.end());

  const double var2 = 2.0 * params.bandwidth * params.bandwidth;
  const double norm = 1.0 / (std::numbers::pi * var2);
  const double db = params.birth_step();
  const double dp = params.pers_step();
  std::vector<double> gb(static_cast<std::size_t>(params.cols));
  std::vector<double> gp(static_cast<std::size_t>(params.rows));
  for (const auto& pair : pts) {
    const double b = std::clamp(pair.birth, params.birth_lo, params.birth_hi);
    const double p = std::clamp(pair.persistence(), params.pers_lo, params.pers_hi);
    const double w = pi_weight(p, params) * norm;
    for (int c = 0; c < params.cols; ++c) {
      const double d = params.birth_lo + (c + 0.5) * db - b;
      gb[static_cast<std::size_t>(c)] = std::exp(-d * d / var2);
    }
    for (int r = 0; r < params.rows; ++r) {
      const double d = params.pers_lo + (r + 0.5) * dp - p;
      gp[static_cast<std::size_t>(r)] = std::exp(-d * d / var2);
    }
    for (int r = 0; r < params.rows; ++r)
      for (int c = 0; c < params.cols; ++c)
        img.values[static_cast<std::size_t>(r) * params.cols + c] +=
            w * gp[static_cast<std::size_t>(r)] * gb[static_cast<std::size_t>(c)];
  }
  return img;
}

/// Per-entry Lipschitz bound of a persistence image with respect to moving each
/// of `n_points` diagram points by Euclidean distance at most 1, for weights
/// held at `w_max`: w_max / (2 pi s^2) / s * exp(-1/2) per point.
inline double pi_lipschitz_bound(std::size_t n_points, double w_max, const PiParams& params) {
  const double s = params.bandwidth;
  return static_cast<double>(n_points) * w_max / (2.0 * std::numbers::pi * s * s) / s * std::exp(-0.5);
}

/// Extra per-entry sensitivity from the linear weight moving with persistence.
inline double pi_weight_lipschitz(std::size_t n_points, const PiParams& params) {
  if (params.weighting == PiWeighting::kConstant) return 0.0;
  const double s = params.bandwidth;
  return static_cast<double>(n_points) / params.pers_hi / (2.0 * std::numbers::pi * s * s);
}

struct ObjectDescriptor {
  std::vector<double> values;
  int n_slices = 0;         // slices that carry data
  int n_slices_padded = 0;  // blocks in `values`
  int pi_size = 0;

  std::span<const double> block(int k) const {
    return std::span<const double>(values).subspan(static_cast<std::size_t>(k) * pi_size,
                                                   static_cast<std::size_t>(pi_size));
  }
};

/// Stacks the images in slice order and appends zero blocks up to `n_slices_padded`.
inline ObjectDescriptor stack_images(std::span<const PersistenceImage> images, int n_slices_padded, int pi_size) {
  if (static_cast<int>(images.size()) > n_slices_padded)
    throw Error(ErrorCode::kTooManySlices, std::to_string(images.size()) + " slices exceed padding of " +
                                               std::to_string(n_slices_padded));
  ObjectDescriptor d;
  d.n_slices = static_cast<int>(images.size());
  d.n_slices_padded = n_slices_padded;
  d.pi_size = pi_size;
  d.values.assign(static_cast<std::size_t>(n_slices_padded) * pi_size, 0.0);
  for (std::size_t k = 0; k < images.size(); ++k) {
    if (static_cast<int>(images[k].values.size()) != pi_size)
      throw Error(ErrorCode::kDimensionMismatch, "persistence image size mismatch");
    std::copy(images[k].values.begin(), images[k].values.end(),
              d.values.begin() + static_cast<std::ptrdiff_t>(k * static_cast<std::size_t>(pi_size)));
  }
  return d;
}

inline ObjectDescriptor build_descriptor(std::span<const PersistenceDiagram> slices, int n_slices_padded,
                                         const PiParams& params) {
  params.validate();
  if (static_cast<int>(slices.size()) > n_slices_padded)
    throw Error(ErrorCode::kTooManySlices, std::to_string(slices.size()) + " slices exceed padding of " +
                                               std::to_string(n_slices_padded));
  std::vector<PersistenceImage> images;
  images.reserve(slices.size());
  for (const auto& pd : slices) images.push_back(persistence_image(pd, params));
  return stack_images(images, n_slices_padded, params.size());
}

/// Zero-extends a descriptor to `n_slices_padded` blocks.
inline ObjectDescriptor pad_descriptor(const ObjectDescriptor& d, int n_slices_padded) {
  if (n_slices_padded < d.n_slices_padded)
    throw Error(ErrorCode::kDimensionMismatch, "descriptor longer than requested padding");
  ObjectDescriptor out = d;
  out.n_slices_padded = n_slices_padded;
  out.values.resize(static_cast<std::size_t>(n_slices_padded) * d.pi_size, 0.0);
  return out;
}

/// One real per line, 17 significant digits.
inline std::string format_descriptor(const ObjectDescriptor& d) {
  std::string out;
  out.reserve(d.values.size() * 24);
  for (double v : d.values) out += detail::format_real(v) + "\n";
  return out;
}

inline std::vector<double> parse_descriptor_values(std::string_view text) {
  std::vector<double> values;
  std::size_t pos = 0;
  std::size_t line_no = 0;
  while (pos < text.size()) {
    std::size_t nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    auto tokens = detail::split_ws(text.substr(pos, nl - pos));
    pos = nl + 1;
    ++line_no;
    if (tokens.empty()) continue;
    double v = 0.0;
    if (tokens.size() != 1 || !detail::parse_real(tokens[0], v)) throw ParseError(line_no, "expected one real");
    values.push_back(v);
  }
  return values;
}

}  // namespace slicetopo
