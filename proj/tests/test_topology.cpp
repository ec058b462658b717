// SPDX-License-Identifier: Apache-2.0
#include <random>

#include <gtest/gtest.h>

#include "slicetopo/topology.hpp"
#include "slicetopo/verify/h0_oracle.hpp"

namespace slicetopo {
namespace {

const SliceParams kParams = SliceParams::with_defaults(0.1, 0.025);

Vertex make_vertex(double x, double y, VertexKind kind) {
  return {{x, y, 0.0}, kind, 0, 0.0};
}

TEST(EvalF, TerminationPairsAreZero) {
  const Vertex a = make_vertex(0.025, 0.3, VertexKind::kTermination);
  const Vertex b = make_vertex(0.1, 0.9, VertexKind::kTermination);
  EXPECT_EQ(eval_f(a, b, kParams), 0.0);
  EXPECT_EQ(eval_f(a, a, kParams), 0.0);
}

TEST(EvalF, SliceToOwnTerminationIsInfinite) {
  const Vertex s = make_vertex(0.025, 0.3, VertexKind::kSlice);
  const Vertex t = make_vertex(0.025, 0.9, VertexKind::kTermination);
  EXPECT_EQ(eval_f(s, t, kParams), kInfinity);
  EXPECT_EQ(eval_f(t, s, kParams), kInfinity);
}

TEST(EvalF, SameColumnSlicePoints) {
  const Vertex a = make_vertex(0.025, 0.2, VertexKind::kSlice);
  const Vertex b = make_vertex(0.025, 0.5, VertexKind::kSlice);
  EXPECT_DOUBLE_EQ(eval_f(a, b, kParams), 0.325);
  EXPECT_EQ(eval_f(a, b, kParams), eval_f(b, a, kParams));
  EXPECT_EQ(eval_f(a, a, kParams), 0.025);
}

TEST(EvalF, DifferentColumnsAreInfinite) {
  const Vertex a = make_vertex(0.025, 0.2, VertexKind::kSlice);
  const Vertex o = make_vertex(0.05, 0.2, VertexKind::kOrigin);
  EXPECT_EQ(eval_f(a, o, kParams), kInfinity);
  const Vertex o2 = make_vertex(0.025, 0.1, VertexKind::kOrigin);
  const Vertex t2 = make_vertex(0.025, 0.6, VertexKind::kTermination);
  EXPECT_DOUBLE_EQ(eval_f(o2, t2, kParams), 0.025 + 0.5);
  EXPECT_DOUBLE_EQ(eval_f(a, o2, kParams), 0.025 + 0.1);
}

ColumnizedSlice columnized(std::initializer_list<Point3> pts) { return columnize(Slice{0, pts}, kParams); }

TEST(BuildFiltration, SinglePoint) {
  const auto g = build_filtration(columnized({{0.01, 0.3, 0}}), kParams);
  ASSERT_EQ(g.vertices.size(), 3u);
  EXPECT_EQ(g.vertices[0].value, 0.025);
  EXPECT_EQ(g.vertices[1].value, 0.025);
  EXPECT_EQ(g.vertices[2].value, 0.0);
  ASSERT_EQ(g.edges.size(), 2u);
  EXPECT_EQ(g.edges[0].u, 0u);
  EXPECT_EQ(g.edges[0].v, 1u);
  EXPECT_EQ(g.edges[0].value, 0.025);
  EXPECT_EQ(g.edges[1].u, 1u);
  EXPECT_EQ(g.edges[1].v, 2u);
  EXPECT_EQ(g.edges[1].value, 0.025);
}

TEST(BuildFiltration, TwoColumns) {
  const auto g = build_filtration(columnized({{0.01, 0.3, 0}, {0.06, 0.2, 0}}), kParams);
  ASSERT_EQ(g.vertices.size(), 6u);
  ASSERT_EQ(g.edges.size(), 5u);
  int zero_edges = 0;
  for (const auto& e : g.edges) {
    if (e.value == 0.0) {
      ++zero_edges;
      EXPECT_EQ(g.vertices[e.u].kind, VertexKind::kTermination);
      EXPECT_EQ(g.vertices[e.v].kind, VertexKind::kTermination);
    }
  }
  EXPECT_EQ(zero_edges, 1);
}

ColumnizedSlice random_slice(std::mt19937_64& rng, int max_points, bool quantized) {
  std::uniform_int_distribution<int> count(1, max_points);
  std::uniform_real_distribution<double> u(0.0, 0.2);
  std::uniform_real_distribution<double> sig(0.01, 0.08);
  const SliceParams p = SliceParams::with_defaults(0.1, sig(rng));
  Slice s{0, {}};
  const int n = count(rng);
  for (int i = 0; i < n; ++i) {
    double y = u(rng);
    if (quantized) y = std::floor(y * 20.0) / 20.0;
    s.points.push_back({u(rng), y, 0.0});
  }
  return columnize(s, p);
}

TEST(BuildFiltration, EdgeCountBoundAndMonotonicity) {
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 200; ++trial) {
    const ColumnizedSlice cs = random_slice(rng, 40, trial % 2 == 0);
    const auto g = build_filtration(cs, kParams);
    std::vector<std::size_t> m(cs.column_count(), 0);
    for (std::size_t c : cs.point_column) ++m[c];
    std::size_t bound = 2 * cs.column_count() - 1;
    for (std::size_t mj : m) bound += (mj + 1) * mj / 2;
    EXPECT_LE(g.edges.size(), bound);
    for (const auto& e : g.edges) {
      EXPECT_NE(e.value, kInfinity);
      EXPECT_GE(e.value, std::max(g.vertices[e.u].value, g.vertices[e.v].value) - 1e-12);
    }
  }
}

TEST(PersistenceH0, TwoPointColumnByHand) {
  const auto g = build_filtration(columnized({{0.01, 0.0, 0}, {0.02, 1.0, 0}}), kParams);
  const PersistenceDiagram pd = persistence_h0(g);
  const double x = 0.025;
  const std::vector<PersistencePair> expected{{x, x}, {x, x + 1.0}, {x, x + 1.0}};
  EXPECT_EQ(pd.points, expected);
  EXPECT_EQ(pd.essential_count(), 1u);
  EXPECT_EQ(pd.essential_births, std::vector<double>{0.0});

  const PersistenceDiagram filtered = filter_diagram(pd);
  EXPECT_EQ(filtered.points, (std::vector<PersistencePair>{{x, x + 1.0}}));
  EXPECT_EQ(filtered.essential_count(), 0u);
}

TEST(PersistenceH0, LoneTermination) {
  FiltrationGraph g;
  g.vertices.push_back(make_vertex(0.025, 0.0, VertexKind::kTermination));
  const PersistenceDiagram pd = persistence_h0(g);
  EXPECT_TRUE(pd.points.empty());
  EXPECT_EQ(pd.essential_count(), 1u);
}

TEST(PersistenceH0, MatchesBruteForceOracle) {
  std::mt19937_64 rng(13);
  for (int trial = 0; trial < 300; ++trial) {
    const ColumnizedSlice cs = random_slice(rng, 12, trial % 3 != 0);
    const auto g = build_filtration(cs, kParams);
    const PersistenceDiagram fast = persistence_h0(g);
    const PersistenceDiagram slow = verify::brute_force_h0(g.vertices, kParams);
    ASSERT_EQ(fast.points, slow.points) << "trial " << trial;
    ASSERT_EQ(fast.essential_births, slow.essential_births) << "trial " << trial;
  }
}

TEST(PersistenceH0, SortedChainMatchesAllPairs) {
  std::mt19937_64 rng(14);
  for (int trial = 0; trial < 200; ++trial) {
    const ColumnizedSlice cs = random_slice(rng, 80, trial % 2 == 0);
    const auto full = persistence_h0(build_filtration(cs, kParams, ColumnEdges::kAllPairs));
    const auto chain_graph = build_filtration(cs, kParams, ColumnEdges::kSortedChain);
    const auto chain = persistence_h0(chain_graph);
    EXPECT_EQ(full.points, chain.points);
    EXPECT_EQ(full.essential_births, chain.essential_births);
    EXPECT_LE(chain_graph.edges.size(), cs.slice.points.size() + 2 * cs.column_count());
  }
}

struct YoungerSurvives {
  static bool first_is_younger(double ba, std::size_t a, double bb, std::size_t b) {
    return !ElderRule::first_is_younger(ba, a, bb, b);
  }
};

TEST(PersistenceH0, OracleCatchesBrokenElderRule) {
  std::mt19937_64 rng(15);
  int mismatches = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const ColumnizedSlice cs = random_slice(rng, 12, true);
    const auto g = build_filtration(cs, kParams);
    mismatches += persistence_h0<YoungerSurvives>(g).points != verify::brute_force_h0(g.vertices, kParams).points;
  }
  EXPECT_GT(mismatches, 0);
}

TEST(PersistenceH0, ColumnSemantics) {
  std::mt19937_64 rng(16);
  std::uniform_int_distribution<int> n_cols(1, 12);
  std::uniform_int_distribution<int> n_pts(1, 15);
  std::uniform_real_distribution<double> y0(-0.3, 0.3);
  std::uniform_real_distribution<double> gap(0.0, 0.01);
  for (int trial = 0; trial < 100; ++trial) {
    Slice s{0, {}};
    std::vector<int> cols;
    for (int j = 0, k = n_cols(rng); j < 40 && static_cast<int>(cols.size()) < k; ++j)
      if (rng() % 2) cols.push_back(j);
    if (cols.empty()) cols.push_back(0);
    std::map<int, std::pair<double, double>> span;
    for (int j : cols) {
      double y = y0(rng);
      span[j] = {y, y};
      for (int i = 0, n = n_pts(rng); i < n; ++i) {
        s.points.push_back({(j + 0.5) * kParams.sigma2, y, 0.0});
        span[j].second = y;
        y += gap(rng);
      }
    }
    const PersistenceDiagram pd = slice_diagram(s, kParams);
    ASSERT_EQ(pd.points.size(), cols.size());
    std::size_t k = 0;
    for (const auto& [j, yy] : span) {
      const double birth = (j + 1) * kParams.sigma2;
      EXPECT_EQ(pd.points[k].birth, birth);
      EXPECT_EQ(pd.points[k].death, birth + (yy.second - yy.first));
      ++k;
    }
  }
}

TEST(FilterDiagram, KeepsMaxDeathPerBirth) {
  PersistenceDiagram pd;
  pd.points = {{0.1, 0.3}, {0.1, 0.5}, {0.2, 0.25}};
  pd.essential_births = {0.0};
  EXPECT_EQ(filter_diagram(pd).points, (std::vector<PersistencePair>{{0.1, 0.5}, {0.2, 0.25}}));
  EXPECT_TRUE(filter_diagram(PersistenceDiagram{}).points.empty());
}

TEST(FilterDiagram, DropsBackboneSelfMerges) {
  PersistenceDiagram pd;
  pd.points = {{0.0, 0.0}, {0.0, 0.0}, {0.05, 0.05}, {0.05, 0.2}};
  EXPECT_EQ(filter_diagram(pd).points, (std::vector<PersistencePair>{{0.05, 0.2}}));
}

TEST(FilterDiagram, CapPolicyKeepsEssentialAtMaxValue) {
  PersistenceDiagram pd;
  pd.points = {{0.1, 0.3}};
  pd.essential_births = {0.0};
  pd.max_value = 0.7;
  EXPECT_EQ(filter_diagram(pd, EssentialPolicy::kCapAtMaxValue).points,
            (std::vector<PersistencePair>{{0.0, 0.7}, {0.1, 0.3}}));
}

TEST(DiagramText, SortedSeventeenDigits) {
  PersistenceDiagram pd;
  pd.points = {{0.2, 0.3}, {0.1, 1.0 / 3.0}};
  const std::string text = format_diagram(pd);
  EXPECT_EQ(text, "0.10000000000000001 0.33333333333333331\n0.20000000000000001 0.29999999999999999\n");
  const PersistenceDiagram back = parse_diagram(text);
  EXPECT_EQ(back.points, (std::vector<PersistencePair>{{0.1, 1.0 / 3.0}, {0.2, 0.3}}));
  EXPECT_THROW(parse_diagram("0.1\n"), ParseError);
  EXPECT_THROW(parse_diagram("0.5 0.1\n"), ParseError);
}

}  // namespace
}  // namespace slicetopo
