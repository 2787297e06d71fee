#pragma once

// Sliding-window SLA bookkeeping: served ratio, windowed average rate, the
// per-slice SLA flag, the victim reward and violation-rate statistics.

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "ransim/slicing_env.hpp"

namespace ransim {

enum class RewardMode { kSlaAware, kSlaUnaware };

/// Ring buffers holding the last W slots of every slice.
class SlaWindow {
 public:
  struct Entry {
    bool active = false;
    bool success = false;
    double rate = 0.0;
  };

  SlaWindow(std::size_t num_slices, std::size_t window_len)
      : window_len_(window_len), entries_(num_slices) {
    if (window_len == 0) throw std::invalid_argument("window_len must be positive");
    for (auto& ring : entries_) ring.reserve(window_len);
  }

  std::size_t window_len() const { return window_len_; }
  std::size_t num_slices() const { return entries_.size(); }
  std::uint64_t slots_seen() const { return slots_seen_; }
  bool full() const { return slots_seen_ >= window_len_; }

  /// Number of retained entries per slice (identical for all slices).
  std::size_t size() const { return entries_.empty() ? 0 : entries_.front().size(); }

  void push(const SlotOutcome& outcome) {
    if (outcome.rates.size() != entries_.size())
      throw std::invalid_argument("SlaWindow::push: slice count mismatch");
    const bool was_full = size() == window_len_;
    for (std::size_t k = 0; k < entries_.size(); ++k) {
      Entry e{outcome.activity.test(k), outcome.success.test(k), outcome.rates[k]};
      auto& ring = entries_[k];
      if (was_full)
        ring[head_] = e;
      else
        ring.push_back(e);
    }
    if (was_full) head_ = (head_ + 1) % window_len_;
    ++slots_seen_;
  }

  /// Entries of slice k, oldest first.
  std::vector<Entry> entries(std::size_t k) const {
    const auto& ring = entries_.at(k);
    std::vector<Entry> out;
    out.reserve(ring.size());
    const std::size_t start = ring.size() == window_len_ ? head_ : 0;
    for (std::size_t i = 0; i < ring.size(); ++i) out.push_back(ring[(start + i) % ring.size()]);
    return out;
  }

  /// Fraction of active slots that were served; 1 when the slice was idle
  /// for the whole window.
  double served_ratio(std::size_t k) const {
    int active = 0, served = 0;
    for (const Entry& e : entries_.at(k)) {
      if (!e.active) continue;
      ++active;
      if (e.success) ++served;
    }
    return active == 0 ? 1.0 : static_cast<double>(served) / active;
  }

  /// Mean rate over the active slots; `idle_value` when there were none.
  double avg_rate(std::size_t k, double idle_value) const {
    int active = 0;
    double sum = 0.0;
    for (const Entry& e : entries_.at(k)) {
      if (!e.active) continue;
      ++active;
      sum += e.rate;
    }
    return active == 0 ? idle_value : sum / active;
  }

  double avg_rate(std::size_t k, const CellConfig& cell) const {
    return avg_rate(k, cell.slices.at(k).min_rate);
  }

 private:
  std::size_t window_len_;
  std::vector<std::vector<Entry>> entries_;
  std::size_t head_ = 0;  // oldest entry once the rings are full
  std::uint64_t slots_seen_ = 0;
};

struct SlaStatus {
  std::vector<double> served_ratio;
  std::vector<double> avg_rate;
  SliceSet sla_ok;
  bool window_full = false;  // statuses before the first full window are warm-up
};

inline bool sla_indicator(const SlaWindow& window, std::size_t k, const CellConfig& cell) {
  const SliceConfig& s = cell.slices.at(k);
  return window.avg_rate(k, s.min_rate) >= s.min_rate &&
         window.served_ratio(k) >= s.min_served_ratio;
}

inline SlaStatus evaluate_sla(const SlaWindow& window, const CellConfig& cell) {
  const std::size_t K = cell.num_slices();
  SlaStatus st;
  st.served_ratio.resize(K);
  st.avg_rate.resize(K);
  for (std::size_t k = 0; k < K; ++k) {
    const SliceConfig& s = cell.slices[k];
    st.served_ratio[k] = window.served_ratio(k);
    st.avg_rate[k] = window.avg_rate(k, s.min_rate);
    st.sla_ok.set(k, st.avg_rate[k] >= s.min_rate && st.served_ratio[k] >= s.min_served_ratio);
  }
  st.window_full = window.full();
  return st;
}

/// r = sum_{active} w_k s_k - lambda * #violated SLAs. The penalty term is
/// dropped in the SLA-unaware mode.
inline double victim_reward(const SlotOutcome& outcome, std::span<const double> weights,
                            SliceSet sla_ok, double lambda, RewardMode mode) {
  double utility = 0.0;
  for (std::size_t k = 0; k < weights.size(); ++k)
    if (outcome.activity.test(k) && outcome.success.test(k)) utility += weights[k];
  if (mode == RewardMode::kSlaUnaware) return utility;
  const int violated = static_cast<int>(weights.size()) - (sla_ok & SliceSet::all(weights.size())).count();
  return utility - lambda * violated;
}

/// Fraction of statuses in [first, last) whose SLA flag for slice k is down.
/// Warm-up statuses (partial window) are skipped.
inline double violation_rate(std::span<const SlaStatus> trace, std::size_t k, std::size_t first,
                             std::size_t last) {
  if (first > last || last > trace.size())
    throw std::out_of_range("violation_rate: slot range outside the trace");
  std::size_t counted = 0, violated = 0;
  for (std::size_t t = first; t < last; ++t) {
    if (!trace[t].window_full) continue;
    ++counted;
    if (!trace[t].sla_ok.test(k)) ++violated;
  }
  if (counted == 0) throw std::invalid_argument("violation_rate: empty slot range");
  return static_cast<double>(violated) / counted;
}

}  // namespace ransim
