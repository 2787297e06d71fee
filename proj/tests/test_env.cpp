#include <cmath>
#include <cstdint>
#include <vector>

#include <gtest/gtest.h>

#include "ransim/rng.hpp"
#include "ransim/slicing_env.hpp"

using namespace ransim;

namespace {

// 0.5 * erfc(sqrt(10)) evaluated with 40-digit arithmetic.
constexpr double kBerTenDb = 3.872108215522041818838e-06;

CellConfig cell_with(int total_rbs, std::vector<double> p) {
  CellConfig cell = default_cell();
  cell.total_rbs = total_rbs;
  for (std::size_t k = 0; k < p.size(); ++k) cell.slices[k].arrival_prob = p[k];
  return cell;
}

EnvState all_active(const CellConfig& cell) {
  return {0, cell.total_rbs, SliceSet::all(3), {0.6, 0.4, 0.3}};
}

}  // namespace

TEST(Rng, SubstreamsAreReproducibleAndDistinct) {
  Rng a = substream(42, "arrivals");
  Rng b = substream(42, "arrivals");
  Rng c = substream(42, "weights");
  Rng d = substream(43, "arrivals");
  const auto xa = a();
  EXPECT_EQ(xa, b());
  EXPECT_NE(xa, c());
  EXPECT_NE(xa, d());
}

TEST(Rng, Uniform01Range) {
  Rng rng = substream(1, "u");
  for (int i = 0; i < 10000; ++i) {
    const double u = uniform01(rng);
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
  }
}

TEST(Rng, UniformIndexCoversRange) {
  Rng rng = substream(1, "idx");
  std::vector<int> hits(7, 0);
  for (int i = 0; i < 70000; ++i) ++hits[uniform_index(rng, 7)];
  for (int h : hits) EXPECT_NEAR(h / 70000.0, 1.0 / 7.0, 0.01);
}

TEST(SliceSet, BitOperations) {
  const SliceSet s = SliceSet::from_flags({1, 0, 1});
  EXPECT_EQ(s.bits(), 5u);
  EXPECT_TRUE(s.test(0));
  EXPECT_FALSE(s.test(1));
  EXPECT_EQ(s.count(), 2);
  EXPECT_TRUE(SliceSet(1).subset_of(s));
  EXPECT_FALSE(SliceSet(2).subset_of(s));
  EXPECT_EQ(SliceSet::all(3).bits(), 7u);
}

TEST(SampleArrivals, CertainAndImpossible) {
  Rng rng = substream(3, "arrivals");
  const auto always = cell_with(11, {1, 1, 1});
  const auto never = cell_with(11, {0, 0, 0});
  for (int i = 0; i < 1000; ++i) {
    EXPECT_EQ(sample_arrivals(rng, always), SliceSet::all(3));
    EXPECT_TRUE(sample_arrivals(rng, never).empty());
  }
}

TEST(SampleArrivals, EmpiricalMeansMatchProbabilities) {
  const CellConfig cell = default_cell();
  Rng rng = substream(7, "arrivals");
  std::vector<double> hits(3, 0.0);
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    const SliceSet a = sample_arrivals(rng, cell);
    for (std::size_t k = 0; k < 3; ++k) hits[k] += a.test(k);
  }
  EXPECT_NEAR(hits[0] / n, 0.6, 0.01);
  EXPECT_NEAR(hits[1] / n, 0.4, 0.01);
  EXPECT_NEAR(hits[2] / n, 0.3, 0.01);
}

TEST(SampleWeights, FixedLaw) {
  const CellConfig cell = default_cell();
  Rng rng = substream(1, "weights");
  EXPECT_EQ(sample_weights(rng, cell, SliceSet::all(3)), (std::vector<double>{0.6, 0.4, 0.3}));
  EXPECT_EQ(sample_weights(rng, cell, SliceSet::from_flags({1, 0, 1})), (std::vector<double>{0.6, 0.0, 0.3}));
}

TEST(SampleWeights, UniformLawMeanAndBounds) {
  CellConfig cell = default_cell();
  for (auto& s : cell.slices) s.weight = WeightLaw::uniform(0.2, 0.8);
  Rng rng = substream(11, "weights");
  double sum = 0.0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    const double w = sample_weights(rng, cell, SliceSet::all(3))[0];
    ASSERT_GE(w, 0.2);
    ASSERT_LE(w, 0.8);
    sum += w;
  }
  EXPECT_NEAR(sum / n, 0.5, 0.01);
}

TEST(SampleWeights, StreamPositionIndependentOfActivity) {
  CellConfig cell = default_cell();
  for (auto& s : cell.slices) s.weight = WeightLaw::uniform(0.2, 0.8);
  Rng a = substream(5, "weights");
  Rng b = substream(5, "weights");
  sample_weights(a, cell, SliceSet::all(3));
  sample_weights(b, cell, SliceSet{});
  EXPECT_EQ(a(), b());
}

TEST(BerAwgn, Endpoints) {
  EXPECT_EQ(ber_awgn(0.0), 0.5);
  EXPECT_LT(ber_awgn(1e4), 1e-300);
  EXPECT_GE(ber_awgn(1e4), 0.0);
}

TEST(BerAwgn, TenDecibels) {
  EXPECT_NEAR(db_to_linear(10.0), 10.0, 1e-12);
  EXPECT_NEAR(ber_awgn(10.0), kBerTenDb, 1e-15);
}

TEST(BerAwgn, MonotoneDecreasing) {
  double prev = ber_awgn(0.0);
  for (double snr = 0.05; snr < 40.0; snr += 0.05) {
    const double b = ber_awgn(snr);
    ASSERT_LT(b, prev) << "snr " << snr;
    prev = b;
  }
}

TEST(AchievedRate, Substitutions) {
  const CellConfig cell = default_cell();
  EXPECT_DOUBLE_EQ(achieved_rate(cell, 0, 0.0), 62.95e6);
  EXPECT_DOUBLE_EQ(achieved_rate(cell, 2, 0.5), 6.295e6);
  // 12.59e6 * 3 * (1 - kBerTenDb)
  EXPECT_NEAR(achieved_rate(cell, 1, kBerTenDb), 37769853.750472700, 1e-6);
}

TEST(IsFeasible, Examples) {
  const CellConfig cell = default_cell();
  EXPECT_TRUE(is_feasible(SliceSet::all(3), SliceSet::all(3), cell));
  EXPECT_FALSE(is_feasible(SliceSet::from_flags({1, 1, 0}), SliceSet::all(3), cell_with(6, {0.6, 0.4, 0.3})));
  EXPECT_TRUE(is_feasible(SliceSet{}, SliceSet::all(3), cell_with(5, {0.6, 0.4, 0.3})));
  // Idle slices consume nothing.
  EXPECT_TRUE(is_feasible(SliceSet::from_flags({1, 1, 0}), SliceSet::from_flags({1, 0, 0}),
                          cell_with(6, {0.6, 0.4, 0.3})));
}

TEST(Step, JammingUrllcAndMmtc) {
  const CellConfig cell = default_cell();
  TrafficStreams streams = TrafficStreams::derive(1);
  const auto [next, out] = step(cell, all_active(cell), SliceSet::all(3), SliceSet::from_flags({0, 1, 1}), streams);
  EXPECT_EQ(out.success, SliceSet::from_flags({1, 0, 0}));
  EXPECT_EQ(out.nack_count, 2);
  EXPECT_EQ(out.rates[1], 0.0);
  EXPECT_GE(out.rates[0], cell.slices[0].min_rate);
  EXPECT_EQ(next.slot, 1u);
  EXPECT_EQ(next.available_rbs, 11);
}

TEST(Step, InfeasibleActionServesNothing) {
  const CellConfig cell = cell_with(6, {1, 1, 1});
  TrafficStreams streams = TrafficStreams::derive(1);
  const auto [next, out] = step(cell, all_active(cell), SliceSet::from_flags({1, 1, 0}), SliceSet{}, streams);
  EXPECT_FALSE(out.feasible_action);
  EXPECT_TRUE(out.scheduled.empty());
  EXPECT_TRUE(out.success.empty());
  EXPECT_EQ(out.nack_count, 0);
  EXPECT_EQ(next.slot, 1u);
}

TEST(Step, EmptyAction) {
  const CellConfig cell = default_cell();
  TrafficStreams streams = TrafficStreams::derive(1);
  const auto [next, out] = step(cell, all_active(cell), SliceSet{}, SliceSet::from_flags({0, 1, 1}), streams);
  EXPECT_TRUE(out.success.empty());
  EXPECT_EQ(out.nack_count, 0);
}

TEST(Step, InactiveSelectedSliceIsNoOp) {
  const CellConfig cell = default_cell();
  TrafficStreams streams = TrafficStreams::derive(1);
  EnvState s{0, 11, SliceSet::from_flags({1, 0, 0}), {0.6, 0.0, 0.0}};
  const auto [next, out] = step(cell, s, SliceSet::all(3), SliceSet::from_flags({0, 1, 0}), streams);
  EXPECT_EQ(out.scheduled, SliceSet::from_flags({1, 0, 0}));
  EXPECT_EQ(out.nack_count, 0);
}

TEST(Step, LowSnrFailsRateRequirement) {
  CellConfig cell = default_cell();
  cell.slices[0].snr_db = -20.0;  // BER near 0.44, rate far below 0.8 c F_k
  TrafficStreams streams = TrafficStreams::derive(1);
  const auto [next, out] = step(cell, all_active(cell), SliceSet::all(3), SliceSet{}, streams);
  EXPECT_FALSE(out.success.test(0));
  EXPECT_GT(out.rates[0], 0.0);
  EXPECT_LT(out.rates[0], cell.slices[0].min_rate);
  EXPECT_TRUE(out.success.test(1));
}

TEST(Step, InvariantsOverRandomTrace) {
  const CellConfig cell = default_cell();
  TrafficStreams streams = TrafficStreams::derive(9);
  Rng pick = substream(9, "actions");
  EnvState s = initial_state(cell, streams);
  for (int t = 0; t < 20000; ++t) {
    const SliceSet action(static_cast<std::uint32_t>(uniform_index(pick, 8)));
    const SliceSet jam(static_cast<std::uint32_t>(uniform_index(pick, 8)));
    auto [next, out] = step(cell, s, action, jam, streams);
    ASSERT_LE(cell.demand(out.scheduled), cell.total_rbs);
    ASSERT_TRUE(out.scheduled.subset_of(out.activity));
    ASSERT_TRUE(out.success.subset_of(out.scheduled));
    for (std::size_t k = 0; k < 3; ++k) {
      if (out.success.test(k)) {
        ASSERT_GE(out.rates[k], cell.slices[k].min_rate);
      }
      if (out.scheduled.test(k) && !out.jammed.test(k) && !out.success.test(k)) {
        ASSERT_LT(out.rates[k], cell.slices[k].min_rate);
      }
    }
    ASSERT_EQ(out.nack_count, (out.jammed & out.scheduled & out.activity).count());
    s = std::move(next);
  }
}

TEST(Step, JammingMonotonicity) {
  const CellConfig cell = default_cell();
  for (std::uint32_t act = 0; act < 8; ++act) {
    for (std::uint32_t jam = 0; jam < 8; ++jam) {
      for (std::uint32_t bigger = 0; bigger < 8; ++bigger) {
        if (!SliceSet(jam).subset_of(SliceSet(bigger))) continue;
        TrafficStreams s1 = TrafficStreams::derive(4);
        TrafficStreams s2 = TrafficStreams::derive(4);
        const auto small = step(cell, all_active(cell), SliceSet(act), SliceSet(jam), s1).second;
        const auto large = step(cell, all_active(cell), SliceSet(act), SliceSet(bigger), s2).second;
        EXPECT_TRUE(large.success.subset_of(small.success)) << act << ' ' << jam << ' ' << bigger;
      }
    }
  }
}

TEST(Step, DeterministicForSameSeed) {
  const CellConfig cell = default_cell();
  auto run = [&] {
    TrafficStreams streams = TrafficStreams::derive(123);
    EnvState s = initial_state(cell, streams);
    std::vector<SlotOutcome> outs;
    for (int t = 0; t < 500; ++t) {
      auto [next, out] = step(cell, s, SliceSet(static_cast<std::uint32_t>(t % 8)), SliceSet(2), streams);
      outs.push_back(out);
      s = next;
    }
    return outs;
  };
  EXPECT_EQ(run(), run());
}

TEST(ObserveVictim, Layout) {
  const CellConfig cell = default_cell();
  const EnvState s{0, 11, SliceSet::from_flags({1, 0, 1}), {0.6, 0.0, 0.3}};
  EXPECT_EQ(observe_victim(s, cell), (std::vector<double>{1.0, 1, 0.6, 0, 0, 1, 0.3}));
  const EnvState idle{0, 11, SliceSet{}, {0.0, 0.0, 0.0}};
  EXPECT_EQ(observe_victim(idle, cell), (std::vector<double>{1.0, 0, 0, 0, 0, 0, 0}));
  EXPECT_EQ(observe_victim(idle, cell).size(), 7u);
}

TEST(CellConfig, Validation) {
  CellConfig cell = default_cell();
  EXPECT_NO_THROW(cell.validate());
  cell.total_rbs = 4;
  EXPECT_THROW(cell.validate(), std::invalid_argument);
  cell = default_cell();
  cell.slices[1].arrival_prob = 1.5;
  EXPECT_THROW(cell.validate(), std::invalid_argument);
  cell = default_cell();
  cell.slices.clear();
  EXPECT_THROW(cell.validate(), std::invalid_argument);
}

TEST(DefaultCell, MinRateIsSatisfiedWithoutJamming) {
  const CellConfig cell = default_cell();
  for (std::size_t k = 0; k < 3; ++k) {
    EXPECT_DOUBLE_EQ(cell.slices[k].min_rate, 0.8 * 12.59e6 * cell.slices[k].rb_demand);
    EXPECT_GE(achieved_rate(cell, k, ber_awgn(cell.slices[k].snr_linear())), cell.slices[k].min_rate);
  }
}
