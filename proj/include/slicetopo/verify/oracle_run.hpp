// SPDX-License-Identifier: Apache-2.0
//
// Randomized comparison of persistence_h0 against the brute-force oracle.
// Trial t draws from an engine seeded with seed + t, so any failure can be
// replayed alone with --seed (seed + t) --n-trials 1.

#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "slicetopo/rng.hpp"
#include "slicetopo/topology.hpp"
#include "slicetopo/verify/h0_oracle.hpp"

namespace slicetopo::verify {

struct RandomSlice {
  SliceParams params;
  ColumnizedSlice slice;
};

/// 1..max_points points over a few columns; half the draws snap y to a coarse
/// grid so equal filtration values (and elder-rule ties) are common.
inline RandomSlice random_columnized_slice(rng::Engine& e, int max_points) {
  const double sigma1 = rng::uniform(e, 0.05, 0.2);
  const double sigma2 = rng::uniform(e, 0.01, 0.08);
  RandomSlice out{SliceParams::with_defaults(sigma1, sigma2), {}};
  const bool quantized = rng::unit(e) < 0.5;
  const int n = 1 + static_cast<int>(rng::below(e, static_cast<std::uint64_t>(std::max(1, max_points))));
  Slice s{0, {}};
  for (int i = 0; i < n; ++i) {
    const double x = rng::uniform(e, 0.0, 4.0 * sigma2);
    double y = rng::uniform(e, 0.0, 0.2);
    if (quantized) y = std::floor(y * 20.0) / 20.0;
    s.points.push_back({x, y, 0.0});
  }
  out.slice = columnize(s, out.params);
  return out;
}

struct OracleFailure {
  int trial = 0;
  std::uint64_t seed = 0;  // replay seed
  std::string detail;
};

template <typename TieRule = ElderRule>
std::optional<OracleFailure> run_oracle(int n_trials, int max_points, std::uint64_t seed) {
  for (int t = 0; t < n_trials; ++t) {
    const std::uint64_t trial_seed = seed + static_cast<std::uint64_t>(t);
    rng::Engine e(trial_seed);
    const RandomSlice rs = random_columnized_slice(e, max_points);
    const FiltrationGraph g = build_filtration(rs.slice, rs.params);
    const PersistenceDiagram fast = persistence_h0<TieRule>(g);
    const PersistenceDiagram slow = brute_force_h0(g.vertices, rs.params);
    if (fast.points != slow.points || fast.essential_births != slow.essential_births) {
      std::string d = "points:";
      for (const auto& p : rs.slice.slice.points)
        d += " (" + detail::format_real(p.x) + "," + detail::format_real(p.y) + ")";
      d += "\nsigma1 " + detail::format_real(rs.params.sigma1) + " sigma2 " + detail::format_real(rs.params.sigma2);
      d += "\nunion-find:\n" + format_diagram(fast) + "oracle:\n" + format_diagram(slow);
      return OracleFailure{t, trial_seed, d};
    }
  }
  return std::nullopt;
}

}  // namespace slicetopo::verify
