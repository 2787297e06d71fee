#pragma once

// Single-cell downlink slicing environment: per-slot traffic arrivals,
// priority weights, RB feasibility, link rates and jamming.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "ransim/rng.hpp"

namespace ransim {

/// Set of slice indices stored as a bitmask (bit k = slice k). Also used as
/// the action encoding of both agents.
class SliceSet {
 public:
  static constexpr std::size_t kMaxSlices = 20;

  constexpr SliceSet() = default;
  constexpr explicit SliceSet(std::uint32_t bits) : bits_(bits) {}

  /// Builds a set from a 0/1 list, e.g. {1, 0, 1}.
  static SliceSet from_flags(std::initializer_list<int> flags) {
    SliceSet s;
    std::size_t k = 0;
    for (int f : flags) s.set(k++, f != 0);
    return s;
  }

  static constexpr SliceSet all(std::size_t num_slices) {
    return SliceSet(num_slices >= 32 ? ~0u : (1u << num_slices) - 1u);
  }

  constexpr bool test(std::size_t k) const { return (bits_ >> k) & 1u; }
  constexpr void set(std::size_t k, bool on = true) {
    bits_ = on ? (bits_ | (1u << k)) : (bits_ & ~(1u << k));
  }
  constexpr std::uint32_t bits() const { return bits_; }
  constexpr bool empty() const { return bits_ == 0; }
  int count() const { return __builtin_popcount(bits_); }

  constexpr SliceSet operator&(SliceSet o) const { return SliceSet(bits_ & o.bits_); }
  constexpr SliceSet operator|(SliceSet o) const { return SliceSet(bits_ | o.bits_); }
  constexpr SliceSet operator~() const { return SliceSet(~bits_); }
  constexpr bool operator==(const SliceSet&) const = default;

  /// Whether every member of this set is also in `other`.
  constexpr bool subset_of(SliceSet other) const { return (bits_ & ~other.bits_) == 0; }

 private:
  std::uint32_t bits_ = 0;
};

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

/// Per-slice priority weight law: a constant, or uniform on [lo, hi].
struct WeightLaw {
  double lo = 1.0;
  double hi = 1.0;

  static WeightLaw fixed(double w) { return {w, w}; }
  static WeightLaw uniform(double lo, double hi) { return {lo, hi}; }
  bool is_fixed() const { return lo == hi; }
  bool operator==(const WeightLaw&) const = default;
};

struct SliceConfig {
  std::string name;
  double arrival_prob = 0.0;
  int rb_demand = 1;
  double min_rate = 1.0;          // bits/s
  double min_served_ratio = 0.0;
  WeightLaw weight;
  double snr_db = 10.0;

  double snr_linear() const { return db_to_linear(snr_db); }

  void validate() const {
    auto fail = [&](const std::string& what) {
      throw std::invalid_argument("slice '" + name + "': " + what);
    };
    if (!(arrival_prob >= 0.0 && arrival_prob <= 1.0)) fail("arrival_prob must lie in [0,1]");
    if (rb_demand < 1) fail("rb_demand must be >= 1");
    if (!(min_rate > 0.0)) fail("min_rate must be > 0");
    if (!(min_served_ratio >= 0.0 && min_served_ratio <= 1.0))
      fail("min_served_ratio must lie in [0,1]");
    if (!(weight.lo > 0.0 && weight.lo <= weight.hi && weight.hi <= 1.0))
      fail("weight bounds must satisfy 0 < lo <= hi <= 1");
    if (!std::isfinite(snr_db)) fail("snr_db must be finite");
  }
};

struct CellConfig {
  int total_rbs = 11;
  double rate_constant = 12.59e6;  // bits/s per RB
  std::vector<SliceConfig> slices;

  std::size_t num_slices() const { return slices.size(); }

  void validate() const {
    if (slices.empty()) throw std::invalid_argument("cell: at least one slice is required");
    if (slices.size() > SliceSet::kMaxSlices)
      throw std::invalid_argument("cell: at most 20 slices are supported");
    if (!(rate_constant > 0.0)) throw std::invalid_argument("cell: rate_constant must be > 0");
    int max_demand = 0;
    for (const auto& s : slices) {
      s.validate();
      max_demand = std::max(max_demand, s.rb_demand);
    }
    if (total_rbs < max_demand)
      throw std::invalid_argument("cell: total_rbs must be >= every slice's rb_demand");
  }

  /// Total RB demand of the slices in `set`.
  int demand(SliceSet set) const {
    int sum = 0;
    for (std::size_t k = 0; k < slices.size(); ++k)
      if (set.test(k)) sum += slices[k].rb_demand;
    return sum;
  }
};

/// QPSK bit error rate over AWGN: Q(sqrt(2 snr)) = erfc(sqrt(snr)) / 2.
inline double ber_awgn(double snr_linear) {
  if (snr_linear <= 0.0) return 0.5;
  return 0.5 * std::erfc(std::sqrt(snr_linear));
}

/// D_k = c * F_k * (1 - BER).
inline double achieved_rate(const CellConfig& cell, std::size_t k, double ber) {
  return cell.rate_constant * cell.slices.at(k).rb_demand * (1.0 - ber);
}

/// The eMBB / URLLC / mMTC cell used throughout the evaluation.
inline CellConfig default_cell() {
  CellConfig cell;
  cell.total_rbs = 11;
  cell.rate_constant = 12.59e6;
  const char* names[] = {"embb", "urllc", "mmtc"};
  const double p[] = {0.6, 0.4, 0.3};
  const double w[] = {0.6, 0.4, 0.3};
  const double rho[] = {0.85, 0.95, 0.80};
  const int demand[] = {5, 3, 1};
  for (int k = 0; k < 3; ++k) {
    SliceConfig s;
    s.name = names[k];
    s.arrival_prob = p[k];
    s.rb_demand = demand[k];
    s.min_rate = 0.8 * cell.rate_constant * demand[k];
    s.min_served_ratio = rho[k];
    s.weight = WeightLaw::fixed(w[k]);
    s.snr_db = 10.0;
    cell.slices.push_back(s);
  }
  return cell;
}

/// Scheduling is feasible when the RBs of the selected *active* slices fit in
/// the cell. Selected-but-idle slices consume nothing.
inline bool is_feasible(SliceSet action, SliceSet activity, const CellConfig& cell) {
  return cell.demand(action & activity) <= cell.total_rbs;
}

struct EnvState {
  std::uint64_t slot = 0;
  int available_rbs = 0;
  SliceSet activity;
  std::vector<double> weights;  // 0 for inactive slices

  bool operator==(const EnvState&) const = default;
};

struct SlotOutcome {
  SliceSet activity;
  SliceSet scheduled;
  SliceSet jammed;
  SliceSet success;
  std::vector<double> rates;  // bits/s, 0 when not delivered
  int nack_count = 0;
  bool feasible_action = true;

  bool operator==(const SlotOutcome&) const = default;
};

/// The two randomness sources that drive traffic, separate from the agents'
/// streams.
struct TrafficStreams {
  Rng arrivals;
  Rng weights;

  static TrafficStreams derive(std::uint64_t seed, const std::string& prefix = "") {
    return {substream(seed, prefix + "arrivals"), substream(seed, prefix + "weights")};
  }
};

inline SliceSet sample_arrivals(Rng& rng, const CellConfig& cell) {
  SliceSet active;
  for (std::size_t k = 0; k < cell.num_slices(); ++k)
    active.set(k, bernoulli(rng, cell.slices[k].arrival_prob));
  return active;
}

/// One draw per slice every slot, whether or not the slice is active, so the
/// stream position depends only on the slot count.
inline std::vector<double> sample_weights(Rng& rng, const CellConfig& cell, SliceSet activity) {
  std::vector<double> w(cell.num_slices(), 0.0);
  for (std::size_t k = 0; k < cell.num_slices(); ++k) {
    const WeightLaw& law = cell.slices[k].weight;
    const double draw = law.is_fixed() ? law.lo : uniform_real(rng, law.lo, law.hi);
    if (activity.test(k)) w[k] = draw;
  }
  return w;
}

inline EnvState initial_state(const CellConfig& cell, TrafficStreams& streams) {
  EnvState s;
  s.slot = 0;
  s.available_rbs = cell.total_rbs;
  s.activity = sample_arrivals(streams.arrivals, cell);
  s.weights = sample_weights(streams.weights, cell, s.activity);
  return s;
}

/// Resolves one slot given the victim's scheduling mask and the jammer's mask,
/// then draws the next slot's traffic.
inline std::pair<EnvState, SlotOutcome> step(const CellConfig& cell, const EnvState& state,
                                             SliceSet victim_mask, SliceSet jam_mask,
                                             TrafficStreams& streams) {
  const std::size_t K = cell.num_slices();
  SlotOutcome out;
  out.activity = state.activity;
  out.rates.assign(K, 0.0);
  out.feasible_action = is_feasible(victim_mask, state.activity, cell);
  if (out.feasible_action) out.scheduled = victim_mask & state.activity & SliceSet::all(K);
  out.jammed = jam_mask & out.scheduled;
  for (std::size_t k = 0; k < K; ++k) {
    if (!out.scheduled.test(k)) continue;
    if (out.jammed.test(k)) {
      ++out.nack_count;
      continue;
    }
    const SliceConfig& s = cell.slices[k];
    out.rates[k] = achieved_rate(cell, k, ber_awgn(s.snr_linear()));
    out.success.set(k, out.rates[k] >= s.min_rate);
  }

  EnvState next;
  next.slot = state.slot + 1;
  next.available_rbs = cell.total_rbs;
  next.activity = sample_arrivals(streams.arrivals, cell);
  next.weights = sample_weights(streams.weights, cell, next.activity);
  return {std::move(next), std::move(out)};
}

/// Victim observation [F(t)/F, a_1, w_1, ..., a_K, w_K].
inline std::vector<double> observe_victim(const EnvState& state, const CellConfig& cell) {
  const std::size_t K = cell.num_slices();
  std::vector<double> obs;
  obs.reserve(1 + 2 * K);
  obs.push_back(static_cast<double>(state.available_rbs) / cell.total_rbs);
  for (std::size_t k = 0; k < K; ++k) {
    const bool active = state.activity.test(k);
    obs.push_back(active ? 1.0 : 0.0);
    obs.push_back(active ? state.weights.at(k) : 0.0);
  }
  return obs;
}

}  // namespace ransim
