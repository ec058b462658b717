// SPDX-License-Identifier: Apache-2.0
//
// Point-cloud and depth-scene types, text I/O, and pinhole backprojection.

#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "slicetopo/error.hpp"

namespace slicetopo {

struct Point3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  friend bool operator==(const Point3&, const Point3&) = default;

  Eigen::Vector3d vec() const { return {x, y, z}; }
  static Point3 from(const Eigen::Vector3d& v) { return {v.x(), v.y(), v.z()}; }
  bool finite() const { return std::isfinite(x) && std::isfinite(y) && std::isfinite(z); }
};

enum class CloudFrame : std::uint8_t { kCamera, kNormalized };

struct PointCloud {
  std::vector<Point3> points;
  CloudFrame frame = CloudFrame::kCamera;

  bool empty() const { return points.empty(); }
  std::size_t size() const { return points.size(); }
  friend bool operator==(const PointCloud&, const PointCloud&) = default;
};

/// Axis-aligned bounds of a non-empty cloud.
struct Aabb {
  Eigen::Vector3d min;
  Eigen::Vector3d max;
  Eigen::Vector3d extent() const { return max - min; }
};

inline Aabb bounds(const std::vector<Point3>& pts) {
  if (pts.empty()) throw Error(ErrorCode::kEmptyCloud, "bounds of an empty point set");
  Aabb box{pts.front().vec(), pts.front().vec()};
  for (const auto& p : pts) {
    box.min = box.min.cwiseMin(p.vec());
    box.max = box.max.cwiseMax(p.vec());
  }
  return box;
}

inline Eigen::Vector3d centroid(const std::vector<Point3>& pts) {
  if (pts.empty()) throw Error(ErrorCode::kEmptyCloud, "centroid of an empty point set");
  Eigen::Vector3d sum = Eigen::Vector3d::Zero();
  for (const auto& p : pts) sum += p.vec();
  return sum / static_cast<double>(pts.size());
}

template <typename T>
struct Grid {
  int rows = 0;
  int cols = 0;
  std::vector<T> data;

  Grid() = default;
  Grid(int r, int c, T fill = T{}) : rows(r), cols(c), data(static_cast<std::size_t>(r) * c, fill) {}

  T& at(int row, int col) { return data[static_cast<std::size_t>(row) * cols + col]; }
  const T& at(int row, int col) const { return data[static_cast<std::size_t>(row) * cols + col]; }
  bool contains(int row, int col) const { return row >= 0 && col >= 0 && row < rows && col < cols; }
  friend bool operator==(const Grid&, const Grid&) = default;
};

struct Intrinsics {
  double fx = 280.0;
  double fy = 280.0;
  double cx = 160.0;
  double cy = 120.0;
  friend bool operator==(const Intrinsics&, const Intrinsics&) = default;
};

/// Rigid transform mapping points of a child frame into a parent frame: p_parent = R p_child + t.
struct RigidTransform {
  Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
  Eigen::Vector3d translation = Eigen::Vector3d::Zero();

  Eigen::Vector3d apply(const Eigen::Vector3d& p) const { return rotation * p + translation; }
  Eigen::Vector3d apply_inverse(const Eigen::Vector3d& p) const {
    return rotation.transpose() * (p - translation);
  }
  RigidTransform inverse() const {
    return {rotation.transpose(), -(rotation.transpose() * translation)};
  }
  bool is_proper(double tol = 1e-9) const {
    const Eigen::Matrix3d gram = rotation.transpose() * rotation;
    return (gram - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff() <= tol &&
           std::abs(rotation.determinant() - 1.0) <= tol;
  }
  friend bool operator==(const RigidTransform& a, const RigidTransform& b) {
    return a.rotation == b.rotation && a.translation == b.translation;
  }
};

/// Depth image (meters, 0 = invalid) with aligned instance labels (0 = background).
struct DepthScene {
  Grid<double> depth;
  Grid<std::uint32_t> labels;
  Intrinsics intrinsics;
  RigidTransform camera_pose;  // world <- camera

  void validate() const {
    if (depth.rows != labels.rows || depth.cols != labels.cols)
      throw Error(ErrorCode::kInvalidParams, "depth and label grids differ in size");
    if (!camera_pose.is_proper())
      throw Error(ErrorCode::kInvalidParams, "camera rotation is not a proper rotation");
  }

  std::vector<std::uint32_t> instance_ids() const {
    std::vector<std::uint32_t> ids;
    for (auto id : labels.data)
      if (id != 0) ids.push_back(id);
    std::sort(ids.begin(), ids.end());
    ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
    return ids;
  }

  friend bool operator==(const DepthScene& a, const DepthScene& b) {
    return a.depth == b.depth && a.labels == b.labels && a.intrinsics == b.intrinsics &&
           a.camera_pose == b.camera_pose;
  }
};

/// Camera-frame ray of pixel (u, v) scaled to depth d.
inline Eigen::Vector3d unproject(const Intrinsics& k, double u, double v, double d) {
  return {(u - k.cx) * d / k.fx, (v - k.cy) * d / k.fy, d};
}

inline Eigen::Vector2d project(const Intrinsics& k, const Eigen::Vector3d& p) {
  return {k.fx * p.x() / p.z() + k.cx, k.fy * p.y() / p.z() + k.cy};
}

/// One camera-frame point per pixel labelled `instance_id` with valid depth, in row-major order.
inline PointCloud backproject(const DepthScene& scene, std::uint32_t instance_id) {
  PointCloud cloud;
  cloud.frame = CloudFrame::kCamera;
  bool seen = false;
  for (int v = 0; v < scene.labels.rows; ++v) {
    for (int u = 0; u < scene.labels.cols; ++u) {
      if (scene.labels.at(v, u) != instance_id) continue;
      seen = true;
      const double d = scene.depth.at(v, u);
      if (d <= 0.0) continue;
      cloud.points.push_back(Point3::from(unproject(scene.intrinsics, u, v, d)));
    }
  }
  if (!seen || instance_id == 0)
    throw Error(ErrorCode::kUnknownInstance, "instance " + std::to_string(instance_id) + " not in scene");
  if (cloud.empty())
    throw Error(ErrorCode::kEmptyCloud, "instance " + std::to_string(instance_id) + " has no valid depth");
  return cloud;
}

namespace detail {

inline std::string format_real(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline bool parse_real(std::string_view token, double& out) {
  std::string tmp(token);
  char* end = nullptr;
  out = std::strtod(tmp.c_str(), &end);
  return end != tmp.c_str() && *end == '\0';
}

inline std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    std::size_t j = i;
    while (j < line.size() && !std::isspace(static_cast<unsigned char>(line[j]))) ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIoError, "cannot write " + path.string());
  out << content;
  if (!out) throw Error(ErrorCode::kIoError, "write failed for " + path.string());
}

}  // namespace detail

/// ASCII "x y z" per line; blank lines and '#' comments are skipped.
inline PointCloud parse_cloud(std::string_view text) {
  PointCloud cloud;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    std::string_view line = text.substr(pos, nl - pos);
    pos = nl + 1;
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    auto tokens = detail::split_ws(line);
    if (tokens.empty()) continue;
    if (tokens.size() != 3) throw ParseError(line_no, "expected 3 coordinates, got " + std::to_string(tokens.size()));
    Point3 p;
    if (!detail::parse_real(tokens[0], p.x) || !detail::parse_real(tokens[1], p.y) ||
        !detail::parse_real(tokens[2], p.z))
      throw ParseError(line_no, "malformed coordinate");
    if (!p.finite()) throw ParseError(line_no, "non-finite coordinate");
    cloud.points.push_back(p);
  }
  return cloud;
}

inline std::string format_cloud(const PointCloud& cloud) {
  std::string out;
  out.reserve(cloud.size() * 60);
  for (const auto& p : cloud.points) {
    out += detail::format_real(p.x);
    out += ' ';
    out += detail::format_real(p.y);
    out += ' ';
    out += detail::format_real(p.z);
    out += '\n';
  }
  return out;
}

inline PointCloud load_cloud(const std::filesystem::path& path) {
  return parse_cloud(detail::read_file(path));
}

inline void save_cloud(const PointCloud& cloud, const std::filesystem::path& path) {
  detail::write_file(path, format_cloud(cloud));
}

// Depth scene container, one header line per field then row-major grids:
//
//   slicetopo-depth-scene 1
//   size <rows> <cols>
//   intrinsics <fx> <fy> <cx> <cy>
//   rotation <r00> <r01> <r02> <r10> ... <r22>
//   translation <tx> <ty> <tz>
//   depth
//   <rows lines of cols reals>
//   labels
//   <rows lines of cols integers>

inline std::string format_scene(const DepthScene& scene) {
  using detail::format_real;
  std::string out = "slicetopo-depth-scene 1\n";
  out += "size " + std::to_string(scene.depth.rows) + " " + std::to_string(scene.depth.cols) + "\n";
  const auto& k = scene.intrinsics;
  out += "intrinsics " + format_real(k.fx) + " " + format_real(k.fy) + " " + format_real(k.cx) + " " +
         format_real(k.cy) + "\n";
  out += "rotation";
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) out += " " + format_real(scene.camera_pose.rotation(r, c));
  out += "\ntranslation";
  for (int r = 0; r < 3; ++r) out += " " + format_real(scene.camera_pose.translation(r));
  out += "\ndepth\n";
  for (int r = 0; r < scene.depth.rows; ++r) {
    for (int c = 0; c < scene.depth.cols; ++c) {
      if (c) out += ' ';
      out += format_real(scene.depth.at(r, c));
    }
    out += '\n';
  }
  out += "labels\n";
  for (int r = 0; r < scene.labels.rows; ++r) {
    for (int c = 0; c < scene.labels.cols; ++c) {
      if (c) out += ' ';
      out += std::to_string(scene.labels.at(r, c));
    }
    out += '\n';
  }
  return out;
}

inline DepthScene parse_scene(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    lines.push_back(text.substr(pos, nl - pos));
    pos = nl + 1;
  }
  std::size_t idx = 0;
  auto next = [&](std::string_view key, std::size_t n_values) {
    if (idx >= lines.size()) throw ParseError(idx + 1, "unexpected end of scene file");
    auto tokens = detail::split_ws(lines[idx]);
    ++idx;
    if (tokens.empty() || tokens[0] != key)
      throw ParseError(idx, "expected field '" + std::string(key) + "'");
    if (tokens.size() != n_values + 1) throw ParseError(idx, "wrong value count for '" + std::string(key) + "'");
    std::vector<double> vals(n_values);
    for (std::size_t i = 0; i < n_values; ++i)
      if (!detail::parse_real(tokens[i + 1], vals[i])) throw ParseError(idx, "malformed number");
    return vals;
  };
  {
    if (lines.empty()) throw ParseError(1, "empty scene file");
    auto header = detail::split_ws(lines[0]);
    if (header.size() != 2 || header[0] != "slicetopo-depth-scene") throw ParseError(1, "bad header");
    if (header[1] != "1") throw Error(ErrorCode::kVersionMismatch, "scene format version " + std::string(header[1]));
    idx = 1;
  }
  DepthScene scene;
  auto size = next("size", 2);
  const int rows = static_cast<int>(size[0]);
  const int cols = static_cast<int>(size[1]);
  if (rows < 0 || cols < 0) throw ParseError(idx, "negative size");
  auto k = next("intrinsics", 4);
  scene.intrinsics = {k[0], k[1], k[2], k[3]};
  auto rot = next("rotation", 9);
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) scene.camera_pose.rotation(r, c) = rot[static_cast<std::size_t>(r * 3 + c)];
  auto tr = next("translation", 3);
  scene.camera_pose.translation = {tr[0], tr[1], tr[2]};
  next("depth", 0);
  scene.depth = Grid<double>(rows, cols);
  for (int r = 0; r < rows; ++r, ++idx) {
    if (idx >= lines.size()) throw ParseError(idx + 1, "missing depth row");
    auto tokens = detail::split_ws(lines[idx]);
    if (static_cast<int>(tokens.size()) != cols) throw ParseError(idx + 1, "depth row width mismatch");
    for (int c = 0; c < cols; ++c)
      if (!detail::parse_real(tokens[static_cast<std::size_t>(c)], scene.depth.at(r, c)))
        throw ParseError(idx + 1, "malformed depth value");
  }
  next("labels", 0);
  scene.labels = Grid<std::uint32_t>(rows, cols);
  for (int r = 0; r < rows; ++r, ++idx) {
    if (idx >= lines.size()) throw ParseError(idx + 1, "missing label row");
    auto tokens = detail::split_ws(lines[idx]);
    if (static_cast<int>(tokens.size()) != cols) throw ParseError(idx + 1, "label row width mismatch");
    for (int c = 0; c < cols; ++c) {
      std::string tok(tokens[static_cast<std::size_t>(c)]);
      char* end = nullptr;
      const unsigned long v = std::strtoul(tok.c_str(), &end, 10);
      if (end == tok.c_str() || *end != '\0' || tok[0] == '-') throw ParseError(idx + 1, "malformed label");
      scene.labels.at(r, c) = static_cast<std::uint32_t>(v);
    }
  }
  scene.validate();
  return scene;
}

inline DepthScene load_scene(const std::filesystem::path& path) { return parse_scene(detail::read_file(path)); }

inline void save_scene(const DepthScene& scene, const std::filesystem::path& path) {
  detail::write_file(path, format_scene(scene));
}

}  // namespace slicetopo
