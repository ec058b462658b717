// SPDX-License-Identifier: Apache-2.0
//
// Sublevel filtration of a columnized slice and its 0-dimensional persistence.
//
// The filtration value of a pair of vertices (a, b) is
//
//   f(a, b) = 0                   if a and b are both terminations
//           = inf                 if a.x != b.x, or one is a slice point and
//                                 the other a termination (|dz| = eps2)
//           = a.x + |a.y - b.y|   otherwise
//
// and the value of a vertex is f(v, v). Only finite edges are stored: all
// pairs inside a column (slice points plus the origin), the origin-termination
// pair, and a zero-valued chain through the terminations.

#pragma once

#include <algorithm>
#include <compare>
#include <cstdint>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "slicetopo/error.hpp"
#include "slicetopo/pointcloud.hpp"
#include "slicetopo/slicing.hpp"
#include "slicetopo/union_find.hpp"

namespace slicetopo {

enum class VertexKind : std::uint8_t { kSlice, kOrigin, kTermination };

struct Vertex {
  Point3 point;
  VertexKind kind = VertexKind::kSlice;
  std::size_t column = 0;  // position in ColumnizedSlice::occupied_columns
  double value = 0.0;
};

struct Edge {
  std::uint32_t u = 0;
  std::uint32_t v = 0;
  double value = 0.0;
};

struct FiltrationGraph {
  std::vector<Vertex> vertices;
  std::vector<Edge> edges;
};

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

/// Filtration value of the pair (a, b). The eps2 test is decided from the vertex
/// kinds: the z offsets are 0, eps1 and eps2 above the slab base, and with
/// 2·eps1 < eps2 only a slice/termination pair is exactly eps2 apart.
inline double eval_f(const Vertex& a, const Vertex& b, [[maybe_unused]] const SliceParams& params) {
  const bool a_term = a.kind == VertexKind::kTermination;
  const bool b_term = b.kind == VertexKind::kTermination;
  if (a_term && b_term) return 0.0;
  if (a.point.x != b.point.x) return kInfinity;
  if ((a.kind == VertexKind::kSlice && b_term) || (b.kind == VertexKind::kSlice && a_term)) return kInfinity;
  return a.point.x + std::abs(a.point.y - b.point.y);
}

/// How intra-column edges are materialized. Points of one column lie on a line
/// in y, so the sorted-neighbour chain has the same connected components as
/// the full pair set at every threshold.
enum class ColumnEdges { kAllPairs, kSortedChain };

inline FiltrationGraph build_filtration(const ColumnizedSlice& cs, const SliceParams& params,
                                        ColumnEdges mode = ColumnEdges::kAllPairs) {
  FiltrationGraph g;
  const std::size_t n_pts = cs.slice.points.size();
  const std::size_t n_cols = cs.column_count();
  g.vertices.reserve(n_pts + 2 * n_cols);
  for (std::size_t k = 0; k < n_pts; ++k)
    g.vertices.push_back({cs.slice.points[k], VertexKind::kSlice, cs.point_column[k], 0.0});
  for (std::size_t c = 0; c < n_cols; ++c) g.vertices.push_back({cs.origins[c], VertexKind::kOrigin, c, 0.0});
  for (std::size_t c = 0; c < n_cols; ++c)
    g.vertices.push_back({cs.terminations[c], VertexKind::kTermination, c, 0.0});
  for (auto& v : g.vertices) v.value = eval_f(v, v, params);

  std::vector<std::vector<std::uint32_t>> members(n_cols);
  for (std::size_t k = 0; k < n_pts; ++k) members[cs.point_column[k]].push_back(static_cast<std::uint32_t>(k));
  for (std::size_t c = 0; c < n_cols; ++c) members[c].push_back(static_cast<std::uint32_t>(n_pts + c));

  auto add_edge = [&](std::uint32_t u, std::uint32_t v) {
    const double value = eval_f(g.vertices[u], g.vertices[v], params);
    if (value == kInfinity) return;
    if (value + 1e-12 < std::max(g.vertices[u].value, g.vertices[v].value))
      throw std::logic_error("filtration edge below its endpoint values");
    g.edges.push_back({u, v, value});
  };

  for (std::size_t c = 0; c < n_cols; ++c) {
    auto& col = members[c];
    if (mode == ColumnEdges::kAllPairs) {
      for (std::size_t a = 0; a < col.size(); ++a)
        for (std::size_t b = a + 1; b < col.size(); ++b) add_edge(col[a], col[b]);
    } else {
      std::stable_sort(col.begin(), col.end(), [&](std::uint32_t a, std::uint32_t b) {
        return g.vertices[a].point.y < g.vertices[b].point.y;
      });
      for (std::size_t a = 0; a + 1 < col.size(); ++a) add_edge(col[a], col[a + 1]);
    }
    add_edge(static_cast<std::uint32_t>(n_pts + c), static_cast<std::uint32_t>(n_pts + n_cols + c));
  }
  for (std::size_t c = 0; c + 1 < n_cols; ++c)
    add_edge(static_cast<std::uint32_t>(n_pts + n_cols + c), static_cast<std::uint32_t>(n_pts + n_cols + c + 1));
  return g;
}

struct PersistencePair {
  double birth = 0.0;
  double death = 0.0;
  double persistence() const { return death - birth; }
  friend auto operator<=>(const PersistencePair&, const PersistencePair&) = default;
};

struct PersistenceDiagram {
  std::vector<PersistencePair> points;  // finite pairs, sorted by (birth, death)
  std::vector<double> essential_births;
  double max_value = 0.0;  // largest finite filtration value seen

  std::size_t essential_count() const { return essential_births.size(); }
  bool empty() const { return points.empty(); }
};

/// On a merge the younger component dies: larger birth, then larger vertex index.
struct ElderRule {
  static bool first_is_younger(double birth_a, std::size_t a, double birth_b, std::size_t b) {
    return birth_a != birth_b ? birth_a > birth_b : a > b;
  }
};

/// Standard union-find H0 persistence over the graph's sublevel filtration.
/// `TieRule` is a customization point for mutation testing.
template <typename TieRule = ElderRule>
PersistenceDiagram persistence_h0(const FiltrationGraph& graph) {
  const std::size_t n = graph.vertices.size();
  PersistenceDiagram pd;
  if (n == 0) return pd;

  std::vector<std::size_t> order(graph.edges.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return graph.edges[a].value < graph.edges[b].value; });

  UnionFind uf(n);
  // Oldest vertex of each root's component.
  std::vector<std::size_t> elder(n);
  std::iota(elder.begin(), elder.end(), std::size_t{0});
  for (const auto& v : graph.vertices) pd.max_value = std::max(pd.max_value, v.value);

  for (std::size_t e : order) {
    const Edge& edge = graph.edges[e];
    pd.max_value = std::max(pd.max_value, edge.value);
    std::size_t ru = uf.find(edge.u);
    std::size_t rv = uf.find(edge.v);
    if (ru == rv) continue;
    const std::size_t eu = elder[ru];
    const std::size_t ev = elder[rv];
    const double bu = graph.vertices[eu].value;
    const double bv = graph.vertices[ev].value;
    if (TieRule::first_is_younger(bu, eu, bv, ev)) {
      pd.points.push_back({bu, edge.value});
      uf.link(ru, rv);
    } else {
      pd.points.push_back({bv, edge.value});
      uf.link(rv, ru);
    }
  }
  for (std::size_t v = 0; v < n; ++v)
    if (uf.find(v) == v) pd.essential_births.push_back(graph.vertices[elder[v]].value);
  std::sort(pd.points.begin(), pd.points.end());
  std::sort(pd.essential_births.begin(), pd.essential_births.end());
  return pd;
}

enum class EssentialPolicy {
  kDrop,            // essential classes never reach vectorization
  kCapAtMaxValue,   // treat them as dying at the largest filtration value
};

/// Keeps, for every distinct birth, only the pair with the largest death. Pairs
/// born at 0 are the termination backbone merging with itself and are dropped
/// along with the essential class.
inline PersistenceDiagram filter_diagram(const PersistenceDiagram& pd, EssentialPolicy policy = EssentialPolicy::kDrop) {
  std::vector<PersistencePair> pts = pd.points;
  if (policy == EssentialPolicy::kCapAtMaxValue)
    for (double b : pd.essential_births) pts.push_back({b, pd.max_value});
  std::sort(pts.begin(), pts.end());

  PersistenceDiagram out;
  out.max_value = pd.max_value;
  for (const auto& p : pts) {
    if (p.birth == 0.0 && p.death == 0.0) continue;
    if (!out.points.empty() && out.points.back().birth == p.birth)
      out.points.back() = p;  // sorted, so p.death is the larger one
    else
      out.points.push_back(p);
  }
  return out;
}

/// "birth death" per line, 17 significant digits, sorted.
inline std::string format_diagram(const PersistenceDiagram& pd) {
  std::vector<PersistencePair> pts = pd.points;
  std::sort(pts.begin(), pts.end());
  std::string out;
  for (const auto& p : pts) out += detail::format_real(p.birth) + " " + detail::format_real(p.death) + "\n";
  return out;
}

inline PersistenceDiagram parse_diagram(std::string_view text) {
  PersistenceDiagram pd;
  std::size_t pos = 0;
  std::size_t line_no = 0;
  while (pos < text.size()) {
    std::size_t nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    std::string_view line = text.substr(pos, nl - pos);
    pos = nl + 1;
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    auto tokens = detail::split_ws(line);
    if (tokens.empty()) continue;
    PersistencePair p;
    if (tokens.size() != 2 || !detail::parse_real(tokens[0], p.birth) || !detail::parse_real(tokens[1], p.death))
      throw ParseError(line_no, "expected 'birth death'");
    if (p.death < p.birth) throw ParseError(line_no, "death before birth");
    pd.points.push_back(p);
  }
  std::sort(pd.points.begin(), pd.points.end());
  return pd;
}

/// Filtered diagram of one slice, using the chain edge mode.
inline PersistenceDiagram slice_diagram(const Slice& slice, const SliceParams& params,
                                        EssentialPolicy policy = EssentialPolicy::kDrop) {
  const ColumnizedSlice cs = columnize(slice, params);
  return filter_diagram(persistence_h0(build_filtration(cs, params, ColumnEdges::kSortedChain)), policy);
}

}  // namespace slicetopo
