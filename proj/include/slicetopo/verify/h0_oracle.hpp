// SPDX-License-Identifier: Apache-2.0
//
// Brute-force 0-dimensional persistence used to check persistence_h0.
//
// It shares nothing with the union-find path except the pair function eval_f:
// every vertex pair is evaluated (no column or chain shortcuts), and at each
// critical value the sublevel graph's components are recomputed from scratch
// by traversal. Components are matched to the previous level by containment;
// within a component only the oldest entering class survives.

#pragma once

#include <algorithm>
#include <map>
#include <vector>

#include "slicetopo/topology.hpp"

namespace slicetopo::verify {

inline PersistenceDiagram brute_force_h0(const std::vector<Vertex>& vertices, const SliceParams& params) {
  const std::size_t n = vertices.size();
  PersistenceDiagram pd;
  if (n == 0) return pd;

  std::vector<double> value(n);
  std::vector<std::vector<double>> w(n, std::vector<double>(n, kInfinity));
  std::vector<double> critical;
  for (std::size_t a = 0; a < n; ++a) {
    value[a] = eval_f(vertices[a], vertices[a], params);
    critical.push_back(value[a]);
    for (std::size_t b = a + 1; b < n; ++b) {
      w[a][b] = w[b][a] = eval_f(vertices[a], vertices[b], params);
      if (w[a][b] != kInfinity) critical.push_back(w[a][b]);
    }
  }
  std::sort(critical.begin(), critical.end());
  critical.erase(std::unique(critical.begin(), critical.end()), critical.end());

  // Component label per vertex at the previous level, -1 when absent.
  std::vector<int> prev(n, -1);
  std::vector<double> prev_birth;

  for (double t : critical) {
    std::vector<int> comp(n, -1);
    int n_comp = 0;
    for (std::size_t s = 0; s < n; ++s) {
      if (value[s] > t || comp[s] != -1) continue;
      std::vector<std::size_t> stack{s};
      comp[s] = n_comp;
      while (!stack.empty()) {
        const std::size_t a = stack.back();
        stack.pop_back();
        for (std::size_t b = 0; b < n; ++b) {
          if (comp[b] != -1 || value[b] > t || w[a][b] > t) continue;
          comp[b] = n_comp;
          stack.push_back(b);
        }
      }
      ++n_comp;
    }

    // Births of the classes entering each current component.
    std::vector<std::vector<double>> entering(static_cast<std::size_t>(n_comp));
    std::vector<bool> prev_seen(prev_birth.size(), false);
    for (std::size_t a = 0; a < n; ++a) {
      if (comp[a] == -1) continue;
      auto& bucket = entering[static_cast<std::size_t>(comp[a])];
      if (prev[a] == -1) {
        bucket.push_back(value[a]);
      } else if (!prev_seen[static_cast<std::size_t>(prev[a])]) {
        prev_seen[static_cast<std::size_t>(prev[a])] = true;
        bucket.push_back(prev_birth[static_cast<std::size_t>(prev[a])]);
      }
    }

    std::vector<double> birth(static_cast<std::size_t>(n_comp));
    for (int c = 0; c < n_comp; ++c) {
      auto& bucket = entering[static_cast<std::size_t>(c)];
      std::sort(bucket.begin(), bucket.end());
      birth[static_cast<std::size_t>(c)] = bucket.front();
      for (std::size_t k = 1; k < bucket.size(); ++k) pd.points.push_back({bucket[k], t});
    }
    prev = comp;
    prev_birth = birth;
    pd.max_value = t;
  }
  pd.essential_births = prev_birth;
  std::sort(pd.points.begin(), pd.points.end());
  std::sort(pd.essential_births.begin(), pd.essential_births.end());
  return pd;
}

}  // namespace slicetopo::verify
