#include <cstdint>
#include <vector>

#include <gtest/gtest.h>

#include "ransim/oracle.hpp"

using namespace ransim;

namespace {

// Literal scan written independently of optimal_subset: enumerate every
// 0/1 vector, skip those touching inactive slices or exceeding F.
double brute_force_value(SliceSet activity, const std::vector<double>& w, const CellConfig& cell) {
  const std::size_t K = cell.num_slices();
  double best = 0.0;
  for (std::uint32_t m = 0; m < (1u << K); ++m) {
    int demand = 0;
    double value = 0.0;
    bool ok = true;
    for (std::size_t k = 0; k < K; ++k) {
      if (!((m >> k) & 1u)) continue;
      if (!activity.test(k)) ok = false;
      demand += cell.slices[k].rb_demand;
      value += w[k];
    }
    if (ok && demand <= cell.total_rbs && value > best) best = value;
  }
  return best;
}

}  // namespace

TEST(OptimalSubset, AllActiveDefaultCell) {
  const CellConfig cell = default_cell();
  const std::vector<double> w{0.6, 0.4, 0.3};
  const auto r = optimal_subset(SliceSet::all(3), w, cell);
  EXPECT_EQ(r.best_mask, SliceSet::all(3));
  EXPECT_DOUBLE_EQ(r.best_value, 1.3);
  EXPECT_EQ(r.demand, 9);
}

TEST(OptimalSubset, TightCellPrefersEmbbWithMmtc) {
  CellConfig cell = default_cell();
  cell.total_rbs = 6;
  const std::vector<double> w{0.6, 0.4, 0.3};
  const auto r = optimal_subset(SliceSet::all(3), w, cell);
  EXPECT_EQ(r.best_mask, SliceSet::from_flags({1, 0, 1}));
  EXPECT_DOUBLE_EQ(r.best_value, 0.9);
  EXPECT_EQ(r.demand, 6);
}

TEST(OptimalSubset, NothingActive) {
  const CellConfig cell = default_cell();
  const std::vector<double> w{0.0, 0.0, 0.0};
  const auto r = optimal_subset(SliceSet{}, w, cell);
  EXPECT_TRUE(r.best_mask.empty());
  EXPECT_EQ(r.best_value, 0.0);
}

TEST(OptimalSubset, TiesGoToLowestMask) {
  CellConfig cell = default_cell();
  cell.total_rbs = 5;
  cell.slices[0].rb_demand = 4;
  cell.slices[1].rb_demand = 4;
  const std::vector<double> w{0.5, 0.5, 0.0};
  EXPECT_EQ(optimal_subset(SliceSet::all(3), w, cell).best_mask, SliceSet::from_flags({1, 0, 0}));
}

TEST(OptimalSubset, WeightCountMismatch) {
  const std::vector<double> w{0.6, 0.4};
  EXPECT_THROW(optimal_subset(SliceSet::all(3), w, default_cell()), std::invalid_argument);
}

TEST(OptimalSubset, MatchesIndependentScanOnRandomInstances) {
  Rng rng = substream(21, "instances");
  for (int trial = 0; trial < 2000; ++trial) {
    CellConfig cell = default_cell();
    const std::size_t K = 2 + uniform_index(rng, 5);
    cell.slices.resize(K, cell.slices.back());
    for (auto& s : cell.slices) s.rb_demand = 1 + static_cast<int>(uniform_index(rng, 6));
    cell.total_rbs = 6 + static_cast<int>(uniform_index(rng, 10));
    std::vector<double> w(K);
    SliceSet active;
    for (std::size_t k = 0; k < K; ++k) {
      active.set(k, bernoulli(rng, 0.6));
      w[k] = active.test(k) ? uniform_real(rng, 0.1, 1.0) : 0.0;
    }
    const auto r = optimal_subset(active, w, cell);
    ASSERT_NEAR(r.best_value, brute_force_value(active, w, cell), 1e-12);
    ASSERT_TRUE(r.best_mask.subset_of(active));
    ASSERT_LE(r.demand, cell.total_rbs);
    ASSERT_EQ(r.demand, cell.demand(r.best_mask));
  }
}

TEST(OraclePolicyReturn, DeterministicArrivals) {
  CellConfig cell = default_cell();
  for (auto& s : cell.slices) s.arrival_prob = 1.0;
  EXPECT_NEAR(oracle_policy_return(cell, 1000, TrafficStreams::derive(1)), 1.3, 1e-12);
}

TEST(OraclePolicyReturn, NoArrivals) {
  CellConfig cell = default_cell();
  for (auto& s : cell.slices) s.arrival_prob = 0.0;
  EXPECT_EQ(oracle_policy_return(cell, 1000, TrafficStreams::derive(1)), 0.0);
}

TEST(OraclePolicyReturn, Reproducible) {
  const CellConfig cell = default_cell();
  const double a = oracle_policy_return(cell, 50000, TrafficStreams::derive(77));
  const double b = oracle_policy_return(cell, 50000, TrafficStreams::derive(77));
  EXPECT_EQ(a, b);
  // Default cell: every active slice fits, so the mean is sum_k p_k w_k.
  EXPECT_NEAR(a, 0.6 * 0.6 + 0.4 * 0.4 + 0.3 * 0.3, 0.01);
}

TEST(OptimalSubset, DominatesEveryActionPerSlot) {
  const CellConfig cell = default_cell();
  TrafficStreams streams = TrafficStreams::derive(31);
  EnvState s = initial_state(cell, streams);
  for (int t = 0; t < 2000; ++t) {
    const double best = optimal_subset(s.activity, s.weights, cell).best_value;
    for (std::uint32_t a = 0; a < 8; ++a) {
      TrafficStreams copy = streams;
      const auto out = step(cell, s, SliceSet(a), SliceSet{}, copy).second;
      double value = 0.0;
      for (std::size_t k = 0; k < 3; ++k)
        if (out.success.test(k)) value += s.weights[k];
      ASSERT_LE(value, best + 1e-12);
    }
    s = step(cell, s, SliceSet{}, SliceSet{}, streams).first;
  }
}
