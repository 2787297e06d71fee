#pragma once

// Per-slot exhaustive reference scheduler. Assumes every served, unjammed
// slice succeeds and ignores SLA windows, so it is an upper reference for the
// weighted utility rather than a windowed-constraint optimum.

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>

#include "ransim/slicing_env.hpp"

namespace ransim {

struct OracleResult {
  SliceSet best_mask;
  double best_value = 0.0;
  int demand = 0;
};

/// Scans every subset of the active slices; lowest bitmask wins ties.
inline OracleResult optimal_subset(SliceSet activity, std::span<const double> weights,
                                   const CellConfig& cell) {
  const std::size_t K = cell.num_slices();
  if (K > SliceSet::kMaxSlices) throw std::invalid_argument("optimal_subset: too many slices");
  if (weights.size() != K) throw std::invalid_argument("optimal_subset: weight count mismatch");
  OracleResult best;
  const std::uint32_t limit = 1u << K;
  for (std::uint32_t bits = 0; bits < limit; ++bits) {
    const SliceSet mask(bits);
    if (!mask.subset_of(activity)) continue;
    const int demand = cell.demand(mask);
    if (demand > cell.total_rbs) continue;
    double value = 0.0;
    for (std::size_t k = 0; k < K; ++k)
      if (mask.test(k)) value += weights[k];
    if (value > best.best_value) best = {mask, value, demand};
  }
  return best;
}

/// Mean per-slot weighted utility of always playing optimal_subset with no
/// jammer over `horizon` slots.
inline double oracle_policy_return(const CellConfig& cell, std::uint64_t horizon, TrafficStreams traffic) {
  if (horizon == 0) return 0.0;
  EnvState state = initial_state(cell, traffic);
  double total = 0.0;
  for (std::uint64_t t = 0; t < horizon; ++t) {
    const OracleResult best = optimal_subset(state.activity, state.weights, cell);
    auto [next, out] = step(cell, state, best.best_mask, SliceSet{}, traffic);
    for (std::size_t k = 0; k < cell.num_slices(); ++k)
      if (out.success.test(k)) total += state.weights[k];
    state = std::move(next);
  }
  return total / static_cast<double>(horizon);
}

}  // namespace ransim
