// SPDX-License-Identifier: Apache-2.0
//
// Synthetic scenes: primitive meshes, z-buffer depth rendering with instance
// labels, training-view sampling and occluder placement.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "slicetopo/error.hpp"
#include "slicetopo/pointcloud.hpp"
#include "slicetopo/rng.hpp"

namespace slicetopo {

enum class MeshKind : std::uint8_t { kBox, kCylinder, kSphere, kCone, kLBlock };

inline const char* to_string(MeshKind k) {
  switch (k) {
    case MeshKind::kBox: return "box";
    case MeshKind::kCylinder: return "cylinder";
    case MeshKind::kSphere: return "sphere";
    case MeshKind::kCone: return "cone";
    case MeshKind::kLBlock: return "l_block";
  }
  return "?";
}

inline MeshKind parse_mesh_kind(std::string_view s) {
  for (auto k : {MeshKind::kBox, MeshKind::kCylinder, MeshKind::kSphere, MeshKind::kCone, MeshKind::kLBlock})
    if (s == to_string(k)) return k;
  throw Error(ErrorCode::kInvalidParams, "unknown mesh kind '" + std::string(s) + "'");
}

/// Number of dimension parameters: box (x y z), cylinder (radius height),
/// sphere (radius), cone (radius height), l_block (x y z thickness).
inline std::size_t mesh_dim_count(MeshKind k) {
  switch (k) {
    case MeshKind::kBox: return 3;
    case MeshKind::kCylinder: return 2;
    case MeshKind::kSphere: return 1;
    case MeshKind::kCone: return 2;
    case MeshKind::kLBlock: return 4;
  }
  return 0;
}

/// Closed triangle mesh centered on its bounding box, outward (counter-clockwise) winding.
struct PrimitiveMesh {
  MeshKind kind = MeshKind::kBox;
  std::vector<double> dims;
  std::vector<Eigen::Vector3d> vertices;
  std::vector<std::array<std::uint32_t, 3>> triangles;

  double signed_volume() const {
    double v = 0.0;
    for (const auto& t : triangles) v += vertices[t[0]].dot(vertices[t[1]].cross(vertices[t[2]]));
    return v / 6.0;
  }
  double bounding_radius() const {
    double r = 0.0;
    for (const auto& p : vertices) r = std::max(r, p.norm());
    return r;
  }
};

namespace detail {

class MeshBuilder {
 public:
  std::uint32_t vertex(const Eigen::Vector3d& p) {
    mesh_.vertices.push_back(p);
    return static_cast<std::uint32_t>(mesh_.vertices.size() - 1);
  }
  void tri(std::uint32_t a, std::uint32_t b, std::uint32_t c) { mesh_.triangles.push_back({a, b, c}); }
  void quad(std::uint32_t a, std::uint32_t b, std::uint32_t c, std::uint32_t d) {
    tri(a, b, c);
    tri(a, c, d);
  }
  PrimitiveMesh take(MeshKind kind, std::vector<double> dims) {
    mesh_.kind = kind;
    mesh_.dims = std::move(dims);
    return std::move(mesh_);
  }

 private:
  PrimitiveMesh mesh_;
};

// Counter-clockwise polygon in the xy-plane extruded over z in [-h/2, h/2].
inline void extrude(MeshBuilder& b, const std::vector<Eigen::Vector2d>& poly, double h,
                    const std::vector<std::array<std::uint32_t, 3>>& cap) {
  const auto n = static_cast<std::uint32_t>(poly.size());
  std::vector<std::uint32_t> lo, hi;
  for (const auto& p : poly) lo.push_back(b.vertex({p.x(), p.y(), -0.5 * h}));
  for (const auto& p : poly) hi.push_back(b.vertex({p.x(), p.y(), 0.5 * h}));
  for (std::uint32_t i = 0; i < n; ++i) {
    const std::uint32_t j = (i + 1) % n;
    b.quad(lo[i], lo[j], hi[j], hi[i]);
  }
  for (const auto& t : cap) {
    b.tri(hi[t[0]], hi[t[1]], hi[t[2]]);
    b.tri(lo[t[0]], lo[t[2]], lo[t[1]]);
  }
}

inline std::vector<std::array<std::uint32_t, 3>> fan(std::uint32_t n) {
  std::vector<std::array<std::uint32_t, 3>> out;
  for (std::uint32_t i = 1; i + 1 < n; ++i) out.push_back({0, i, i + 1});
  return out;
}

}  // namespace detail

inline PrimitiveMesh make_mesh(MeshKind kind, const std::vector<double>& dims, int segments = 32) {
  if (dims.size() != mesh_dim_count(kind))
    throw Error(ErrorCode::kInvalidParams, std::string(to_string(kind)) + " needs " +
                                               std::to_string(mesh_dim_count(kind)) + " dimensions");
  for (double d : dims)
    if (!(d > 0.0) || !std::isfinite(d)) throw Error(ErrorCode::kInvalidParams, "mesh dimensions must be positive");
  if (segments < 3) throw Error(ErrorCode::kInvalidParams, "need at least 3 segments");
  const double tau = 2.0 * std::numbers::pi;
  detail::MeshBuilder b;
  switch (kind) {
    case MeshKind::kBox: {
      const double x = dims[0] / 2, y = dims[1] / 2;
      detail::extrude(b, {{-x, -y}, {x, -y}, {x, y}, {-x, y}}, dims[2], detail::fan(4));
      break;
    }
    case MeshKind::kCylinder: {
      std::vector<Eigen::Vector2d> ring;
      for (int i = 0; i < segments; ++i)
        ring.emplace_back(dims[0] * std::cos(tau * i / segments), dims[0] * std::sin(tau * i / segments));
      detail::extrude(b, ring, dims[1], detail::fan(static_cast<std::uint32_t>(segments)));
      break;
    }
    case MeshKind::kSphere: {
      const int rings = std::max(2, segments / 2);
      const auto north = b.vertex({0, 0, dims[0]});
      const auto south = b.vertex({0, 0, -dims[0]});
      std::vector<std::vector<std::uint32_t>> lat;
      for (int r = 1; r < rings; ++r) {
        const double phi = std::numbers::pi * r / rings;
        std::vector<std::uint32_t> row;
        for (int i = 0; i < segments; ++i) {
          const double th = tau * i / segments;
          row.push_back(b.vertex(dims[0] * Eigen::Vector3d(std::sin(phi) * std::cos(th),
                                                           std::sin(phi) * std::sin(th), std::cos(phi))));
        }
        lat.push_back(row);
      }
      const auto s = static_cast<std::size_t>(segments);
      for (std::size_t i = 0; i < s; ++i) {
        const std::size_t j = (i + 1) % s;
        b.tri(north, lat.front()[i], lat.front()[j]);
        b.tri(south, lat.back()[j], lat.back()[i]);
        for (std::size_t r = 0; r + 1 < lat.size(); ++r) b.quad(lat[r][i], lat[r + 1][i], lat[r + 1][j], lat[r][j]);
      }
      break;
    }
    case MeshKind::kCone: {
      const double h = dims[1];
      const auto apex = b.vertex({0, 0, 0.5 * h});
      const auto base_center = b.vertex({0, 0, -0.5 * h});
      std::vector<std::uint32_t> ring;
      for (int i = 0; i < segments; ++i)
        ring.push_back(b.vertex({dims[0] * std::cos(tau * i / segments), dims[0] * std::sin(tau * i / segments),
                                 -0.5 * h}));
      const auto s = static_cast<std::size_t>(segments);
      for (std::size_t i = 0; i < s; ++i) {
        const std::size_t j = (i + 1) % s;
        b.tri(ring[i], ring[j], apex);
        b.tri(base_center, ring[j], ring[i]);
      }
      break;
    }
    case MeshKind::kLBlock: {
      // Legs along +x and +y sharing the corner at the origin, then centered.
      const double x = dims[0], y = dims[1], t = dims[3];
      if (t >= x || t >= y) throw Error(ErrorCode::kInvalidParams, "l_block thickness must be below both legs");
      std::vector<Eigen::Vector2d> poly{{0, 0}, {x, 0}, {x, t}, {t, t}, {t, y}, {0, y}};
      for (auto& p : poly) p -= Eigen::Vector2d(x / 2, y / 2);
      detail::extrude(b, poly, dims[2], {{0, 1, 2}, {0, 2, 3}, {0, 3, 4}, {0, 4, 5}});
      break;
    }
  }
  return b.take(kind, dims);
}

struct SceneObject {
  std::uint32_t id = 1;
  std::string label;
  MeshKind kind = MeshKind::kBox;
  std::vector<double> dims;
  RigidTransform pose;  // world <- object
};

struct SceneSpec {
  std::vector<SceneObject> objects;
  RigidTransform camera;  // world <- camera
  Intrinsics intrinsics;
  int rows = 240;
  int cols = 320;
  std::uint64_t seed = 0;
  double depth_noise = 0.0;  // Gaussian sigma in meters, 0 = exact
};

/// Camera at `eye` looking at `target`: x right, y down, z forward.
inline RigidTransform look_at(const Eigen::Vector3d& eye, const Eigen::Vector3d& target,
                              Eigen::Vector3d up = Eigen::Vector3d::UnitZ()) {
  const Eigen::Vector3d f = (target - eye).normalized();
  if (f.cross(up).norm() < 1e-6) up = std::abs(f.x()) < 0.9 ? Eigen::Vector3d::UnitX() : Eigen::Vector3d::UnitY();
  const Eigen::Vector3d r = f.cross(up).normalized();
  const Eigen::Vector3d down = f.cross(r);
  RigidTransform t;
  t.rotation.col(0) = r;
  t.rotation.col(1) = down;
  t.rotation.col(2) = f;
  t.translation = eye;
  return t;
}

/// Nearest-hit z-buffer rendering. Each pixel (u, v) casts the ray
/// ((u - cx)/fx, (v - cy)/fy, 1); the depth is its exact intersection with the
/// covering triangle's plane.
inline DepthScene render_depth(const SceneSpec& spec) {
  if (spec.rows <= 0 || spec.cols <= 0) throw Error(ErrorCode::kInvalidParams, "image size must be positive");
  DepthScene scene;
  scene.depth = Grid<double>(spec.rows, spec.cols);
  scene.labels = Grid<std::uint32_t>(spec.rows, spec.cols);
  scene.intrinsics = spec.intrinsics;
  scene.camera_pose = spec.camera;
  const Intrinsics& k = spec.intrinsics;
  constexpr double kNear = 1e-3;

  for (const auto& obj : spec.objects) {
    if (obj.id == 0) throw Error(ErrorCode::kInvalidParams, "instance id 0 is reserved for background");
    const PrimitiveMesh mesh = make_mesh(obj.kind, obj.dims);
    std::vector<Eigen::Vector3d> cam;
    cam.reserve(mesh.vertices.size());
    for (const auto& v : mesh.vertices) cam.push_back(spec.camera.apply_inverse(obj.pose.apply(v)));

    for (const auto& t : mesh.triangles) {
      const Eigen::Vector3d& p0 = cam[t[0]];
      const Eigen::Vector3d& p1 = cam[t[1]];
      const Eigen::Vector3d& p2 = cam[t[2]];
      if (p0.z() <= kNear || p1.z() <= kNear || p2.z() <= kNear) continue;
      const Eigen::Vector3d n = (p1 - p0).cross(p2 - p0);
      const double plane = n.dot(p0);
      const Eigen::Vector2d a = project(k, p0), b = project(k, p1), c = project(k, p2);
      const double area = (b - a).x() * (c - a).y() - (b - a).y() * (c - a).x();
      if (area == 0.0) continue;
      const int u0 = std::max(0, static_cast<int>(std::ceil(std::min({a.x(), b.x(), c.x()}))));
      const int u1 = std::min(spec.cols - 1, static_cast<int>(std::floor(std::max({a.x(), b.x(), c.x()}))));
      const int v0 = std::max(0, static_cast<int>(std::ceil(std::min({a.y(), b.y(), c.y()}))));
      const int v1 = std::min(spec.rows - 1, static_cast<int>(std::floor(std::max({a.y(), b.y(), c.y()}))));
      const double slack = -1e-9 * std::abs(area);
      for (int v = v0; v <= v1; ++v) {
        for (int u = u0; u <= u1; ++u) {
          const Eigen::Vector2d q(u, v);
          auto edge = [&](const Eigen::Vector2d& s, const Eigen::Vector2d& e) {
            return ((e - s).x() * (q - s).y() - (e - s).y() * (q - s).x()) * (area > 0 ? 1.0 : -1.0);
          };
          if (edge(a, b) < slack || edge(b, c) < slack || edge(c, a) < slack) continue;
          const Eigen::Vector3d ray((u - k.cx) / k.fx, (v - k.cy) / k.fy, 1.0);
          const double denom = n.dot(ray);
          if (denom == 0.0) continue;
          const double depth = plane / denom;
          if (!(depth > kNear)) continue;
          double& zb = scene.depth.at(v, u);
          if (zb == 0.0 || depth < zb) {
            zb = depth;
            scene.labels.at(v, u) = obj.id;
          }
        }
      }
    }
  }
  if (spec.depth_noise > 0.0) {
    rng::Engine e(spec.seed);
    for (auto& d : scene.depth.data)
      if (d > 0.0) d = std::max(kNear, d + spec.depth_noise * rng::normal(e));
  }
  return scene;
}

/// 12 icosahedron vertices for n = 12, otherwise a Fibonacci sphere.
inline std::vector<Eigen::Vector3d> view_directions(int n) {
  std::vector<Eigen::Vector3d> out;
  if (n <= 0) return out;
  if (n == 12) {
    const double phi = (1.0 + std::sqrt(5.0)) / 2.0;
    for (double s1 : {-1.0, 1.0})
      for (double s2 : {-1.0, 1.0}) {
        out.push_back(Eigen::Vector3d(0, s1, s2 * phi).normalized());
        out.push_back(Eigen::Vector3d(s1, s2 * phi, 0).normalized());
        out.push_back(Eigen::Vector3d(s2 * phi, 0, s1).normalized());
      }
    return out;
  }
  const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
  for (int i = 0; i < n; ++i) {
    const double z = 1.0 - 2.0 * (i + 0.5) / n;
    const double r = std::sqrt(1.0 - z * z);
    out.emplace_back(r * std::cos(golden * i), r * std::sin(golden * i), z);
  }
  return out;
}

struct TrainingView {
  PointCloud cloud;             // camera frame
  std::string label;
  Eigen::Vector3d viewpoint;    // unit direction object -> camera, object frame
};

struct RenderSettings {
  Intrinsics intrinsics;
  int rows = 240;
  int cols = 320;
};

/// Object at the origin (identity pose), camera at `distance` along `dir`.
inline TrainingView render_view(MeshKind kind, const std::vector<double>& dims, const std::string& label,
                                const Eigen::Vector3d& dir, double distance, const RenderSettings& rs = {}) {
  SceneSpec spec;
  spec.objects.push_back({1, label, kind, dims, {}});
  spec.camera = look_at(distance * dir.normalized(), Eigen::Vector3d::Zero());
  spec.intrinsics = rs.intrinsics;
  spec.rows = rs.rows;
  spec.cols = rs.cols;
  return {backproject(render_depth(spec), 1), label, dir.normalized()};
}

inline std::vector<TrainingView> gen_training_views(MeshKind kind, const std::vector<double>& dims,
                                                    const std::string& label, int n_dirs, double distance,
                                                    const RenderSettings& rs = {}) {
  std::vector<TrainingView> out;
  for (const auto& d : view_directions(n_dirs)) out.push_back(render_view(kind, dims, label, d, distance, rs));
  return out;
}

struct OcclusionRequest {
  SceneObject target;
  SceneObject occluder;  // pose is overwritten
  RigidTransform camera;
  RenderSettings render;
  double fraction = 0.3;
  std::uint64_t seed = 0;
  std::optional<Eigen::Vector2d> direction;  // image-plane approach direction; random if empty
  double gap = 0.05;                          // meters between target and occluder
};

struct OccludedScene {
  SceneSpec spec;
  double achieved_fraction = 0.0;
  std::size_t unoccluded_pixels = 0;
  Eigen::Vector2d direction;  // image-plane direction from target toward the occluder side
};

namespace detail {

inline std::size_t count_label(const DepthScene& s, std::uint32_t id) {
  return static_cast<std::size_t>(std::count(s.labels.data.begin(), s.labels.data.end(), id));
}

}  // namespace detail

/// Places `occluder` between camera and target, shifted sideways along an
/// image direction; a bisection on the shift makes the target lose `fraction`
/// (within 0.05) of its unoccluded pixels.
inline OccludedScene gen_occluded_scene(const OcclusionRequest& req) {
  if (!(req.fraction >= 0.0 && req.fraction < 0.8))
    throw Error(ErrorCode::kInvalidParams, "occlusion fraction must be in [0, 0.8)");
  if (req.occluder.id == req.target.id) throw Error(ErrorCode::kInvalidParams, "occluder and target share an id");
  SceneSpec spec;
  spec.camera = req.camera;
  spec.intrinsics = req.render.intrinsics;
  spec.rows = req.render.rows;
  spec.cols = req.render.cols;
  spec.seed = req.seed;
  spec.objects.push_back(req.target);
  const std::size_t full = detail::count_label(render_depth(spec), req.target.id);
  if (full == 0) throw Error(ErrorCode::kEmptyCloud, "target not visible");

  Eigen::Vector2d dir;
  if (req.direction) {
    dir = req.direction->normalized();
  } else {
    rng::Engine e(req.seed);
    const double a = rng::uniform(e, 0.0, 2.0 * std::numbers::pi);
    dir = {std::cos(a), std::sin(a)};
  }

  const PrimitiveMesh target_mesh = make_mesh(req.target.kind, req.target.dims);
  const PrimitiveMesh occ_mesh = make_mesh(req.occluder.kind, req.occluder.dims);
  const Eigen::Vector3d center = req.camera.apply_inverse(req.target.pose.translation);
  const double r_t = target_mesh.bounding_radius();
  const double r_o = occ_mesh.bounding_radius();
  const double depth = center.z() - r_t - req.gap - r_o;
  if (!(depth > 0.05)) throw Error(ErrorCode::kInvalidParams, "no room for an occluder in front of the target");

  // Occluder axes: local x along the approach direction, local z along the optical axis.
  Eigen::Matrix3d local;
  local.col(0) = Eigen::Vector3d(dir.x(), dir.y(), 0.0);
  local.col(2) = Eigen::Vector3d::UnitZ();
  local.col(1) = local.col(2).cross(local.col(0));
  const Eigen::Vector3d lateral(dir.x(), dir.y(), 0.0);
  const Eigen::Vector3d base = center * (depth / center.z());

  OccludedScene out;
  out.unoccluded_pixels = full;
  out.direction = dir;
  auto place = [&](double shift) {
    SceneObject occ = req.occluder;
    occ.pose.rotation = req.camera.rotation * local;
    occ.pose.translation = req.camera.apply(base + shift * lateral);
    SceneSpec s = spec;
    s.objects.push_back(occ);
    return s;
  };
  auto hidden = [&](const SceneSpec& s) {
    return 1.0 - static_cast<double>(detail::count_label(render_depth(s), req.target.id)) / full;
  };

  double far = (r_t * depth / center.z()) + 2.0 * r_o;
  while (hidden(place(far)) > 0.0) far *= 2.0;
  double lo = 0.0, hi = far;
  SceneSpec best = place(far);
  double best_fraction = 0.0;
  if (req.fraction > 0.0) {
    const double h0 = hidden(place(0.0));
    if (h0 < req.fraction - 0.05)
      throw Error(ErrorCode::kUnreachableFraction, "occluder hides at most " + std::to_string(h0));
    best = place(0.0);
    best_fraction = h0;
    for (int it = 0; it < 40 && std::abs(best_fraction - req.fraction) > 0.01; ++it) {
      const double mid = 0.5 * (lo + hi);
      const SceneSpec s = place(mid);
      const double h = hidden(s);
      if (std::abs(h - req.fraction) < std::abs(best_fraction - req.fraction)) {
        best = s;
        best_fraction = h;
      }
      (h > req.fraction ? lo : hi) = mid;
    }
    if (std::abs(best_fraction - req.fraction) > 0.05)
      throw Error(ErrorCode::kUnreachableFraction, "closest fraction " + std::to_string(best_fraction));
  }
  out.spec = best;
  out.achieved_fraction = best_fraction;
  return out;
}

/// Major axis of an instance's pixel mask in image coordinates (column, row).
inline Eigen::Vector2d silhouette_axis(const DepthScene& scene, std::uint32_t instance_id) {
  Eigen::Vector2d mean = Eigen::Vector2d::Zero();
  Eigen::Matrix2d second = Eigen::Matrix2d::Zero();
  std::size_t n = 0;
  for (int r = 0; r < scene.labels.rows; ++r)
    for (int c = 0; c < scene.labels.cols; ++c)
      if (scene.labels.at(r, c) == instance_id) {
        const Eigen::Vector2d q(c, r);
        mean += q;
        second += q * q.transpose();
        ++n;
      }
  if (n == 0) throw Error(ErrorCode::kUnknownInstance, "instance " + std::to_string(instance_id) + " not in scene");
  mean /= static_cast<double>(n);
  const Eigen::Matrix2d cov = second / static_cast<double>(n) - mean * mean.transpose();
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> solver(cov);
  return solver.eigenvectors().col(1);
}

struct ClassSpec {
  std::string label;
  MeshKind kind;
  std::vector<double> dims;
  bool curved = false;
};

/// Object classes of the evaluation suites: "cuboidal" (box variants),
/// "curved" (spheres, cylinders, cones) and "mixed" (2-3 variants of every primitive).
inline std::vector<ClassSpec> suite_classes(std::string_view suite) {
  const ClassSpec box_small{"box_small", MeshKind::kBox, {0.30, 0.20, 0.12}};
  const ClassSpec box_tall{"box_tall", MeshKind::kBox, {0.16, 0.16, 0.48}};
  const ClassSpec box_long{"box_long", MeshKind::kBox, {0.56, 0.12, 0.12}};
  const std::vector<ClassSpec> cuboidal{
      box_small,
      {"box_flat", MeshKind::kBox, {0.45, 0.32, 0.06}},
      box_tall,
      box_long,
      {"box_cube", MeshKind::kBox, {0.24, 0.24, 0.24}},
      {"box_wide", MeshKind::kBox, {0.50, 0.40, 0.20}},
  };
  const std::vector<ClassSpec> curved{
      {"sphere_small", MeshKind::kSphere, {0.12}, true},
      {"sphere_large", MeshKind::kSphere, {0.22}, true},
      {"cylinder_short", MeshKind::kCylinder, {0.13, 0.20}, true},
      {"cylinder_tall", MeshKind::kCylinder, {0.08, 0.46}, true},
      {"cone_small", MeshKind::kCone, {0.12, 0.28}, true},
      {"cone_large", MeshKind::kCone, {0.20, 0.46}, true},
  };
  if (suite == "cuboidal") return cuboidal;
  if (suite == "curved") return curved;
  if (suite == "mixed") {
    std::vector<ClassSpec> all{box_small, box_tall, box_long,
                               {"l_block", MeshKind::kLBlock, {0.42, 0.30, 0.14, 0.10}},
                               {"l_block_wide", MeshKind::kLBlock, {0.50, 0.50, 0.10, 0.12}}};
    all.insert(all.end(), curved.begin(), curved.end());
    return all;
  }
  throw Error(ErrorCode::kInvalidParams, "unknown suite '" + std::string(suite) + "'");
}

/// Text form of a scene spec, one record per line.
inline std::string format_scene_spec(const SceneSpec& s) {
  using detail::format_real;
  std::string out = "slicetopo-scene-spec 1\n";
  out += "seed " + std::to_string(s.seed) + "\n";
  out += "size " + std::to_string(s.rows) + " " + std::to_string(s.cols) + "\n";
  out += "intrinsics " + format_real(s.intrinsics.fx) + " " + format_real(s.intrinsics.fy) + " " +
         format_real(s.intrinsics.cx) + " " + format_real(s.intrinsics.cy) + "\n";
  out += "depth_noise " + format_real(s.depth_noise) + "\n";
  auto pose = [&](const RigidTransform& t) {
    std::string p;
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c) p += " " + format_real(t.rotation(r, c));
    for (int r = 0; r < 3; ++r) p += " " + format_real(t.translation(r));
    return p;
  };
  out += "camera" + pose(s.camera) + "\n";
  for (const auto& o : s.objects) {
    out += "object " + std::to_string(o.id) + " " + o.label + " " + to_string(o.kind);
    for (double d : o.dims) out += " " + format_real(d);
    out += pose(o.pose) + "\n";
  }
  return out;
}

inline SceneSpec parse_scene_spec(std::string_view text) {
  SceneSpec s;
  std::size_t pos = 0, line_no = 0;
  bool header = false;
  auto num = [&](std::string_view tok) {
    double v = 0.0;
    if (!detail::parse_real(tok, v)) throw ParseError(line_no, "bad number '" + std::string(tok) + "'");
    return v;
  };
  auto integer = [&](std::string_view tok) -> long long {
    const double v = num(tok);
    if (v != std::floor(v)) throw ParseError(line_no, "expected integer");
    return static_cast<long long>(v);
  };
  auto read_pose = [&](const std::vector<std::string_view>& t, std::size_t at) {
    if (t.size() != at + 12) throw ParseError(line_no, "pose needs 12 numbers");
    RigidTransform p;
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c) p.rotation(r, c) = num(t[at + static_cast<std::size_t>(3 * r + c)]);
    for (int r = 0; r < 3; ++r) p.translation(r) = num(t[at + 9 + static_cast<std::size_t>(r)]);
    return p;
  };
  while (pos < text.size()) {
    const auto end = std::min(text.find('\n', pos), text.size());
    const auto line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    const auto t = detail::split_ws(line);
    if (t.empty() || t[0].front() == '#') continue;
    if (!header) {
      if (t.size() != 2 || t[0] != "slicetopo-scene-spec") throw ParseError(line_no, "missing scene-spec header");
      if (t[1] != "1") throw Error(ErrorCode::kVersionMismatch, "scene-spec version " + std::string(t[1]));
      header = true;
      continue;
    }
    if (t[0] == "seed" && t.size() == 2) {
      const double v = num(t[1]);
      if (v < 0) throw ParseError(line_no, "negative seed");
      s.seed = std::stoull(std::string(t[1]));
    } else if (t[0] == "size" && t.size() == 3) {
      s.rows = static_cast<int>(integer(t[1]));
      s.cols = static_cast<int>(integer(t[2]));
    } else if (t[0] == "intrinsics" && t.size() == 5) {
      s.intrinsics = {num(t[1]), num(t[2]), num(t[3]), num(t[4])};
    } else if (t[0] == "depth_noise" && t.size() == 2) {
      s.depth_noise = num(t[1]);
    } else if (t[0] == "camera") {
      s.camera = read_pose(t, 1);
    } else if (t[0] == "object" && t.size() >= 4) {
      SceneObject o;
      o.id = static_cast<std::uint32_t>(integer(t[1]));
      o.label = std::string(t[2]);
      try {
        o.kind = parse_mesh_kind(t[3]);
      } catch (const Error& e) {
        throw ParseError(line_no, e.what());
      }
      const std::size_t nd = mesh_dim_count(o.kind);
      if (t.size() != 4 + nd + 12) throw ParseError(line_no, "object record has wrong field count");
      for (std::size_t i = 0; i < nd; ++i) o.dims.push_back(num(t[4 + i]));
      o.pose = read_pose(t, 4 + nd);
      s.objects.push_back(o);
    } else {
      throw ParseError(line_no, "unknown record '" + std::string(t[0]) + "'");
    }
  }
  if (!header) throw ParseError(line_no, "empty scene spec");
  return s;
}

}  // namespace slicetopo
