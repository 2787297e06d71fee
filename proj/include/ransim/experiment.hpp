#pragma once

// Three-phase protocol: clean training, attack, recovery, with the jammer's
// surrogate training inserted before the attack on separate traffic.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ransim/adversary.hpp"
#include "ransim/config.hpp"
#include "ransim/ddqn.hpp"
#include "ransim/sla_metrics.hpp"
#include "ransim/slicing_env.hpp"

namespace ransim {

inline constexpr const char* kCodeVersion = "1.0.0";

struct SlotRecord {
  std::uint64_t slot = 0;
  std::size_t phase = 0;  // index into MetricsTrace::phase_names
  std::size_t victim_action = 0;
  SliceSet jam_action;    // what the jammer transmitted on, scheduled or not
  std::vector<double> weights;
  SlotOutcome outcome;
  SlaStatus sla;
  double reward = 0.0;    // the reward the victim learned from
  double reward_sla_aware = 0.0;
  double reward_sla_unaware = 0.0;
};

struct MetricsTrace {
  std::vector<std::string> phase_names;
  std::vector<std::pair<std::size_t, std::size_t>> phase_rows;  // [first, last) per phase
  std::vector<SlotRecord> rows;

  std::optional<std::pair<std::size_t, std::size_t>> rows_of(const std::string& phase) const {
    for (std::size_t i = 0; i < phase_names.size(); ++i)
      if (phase_names[i] == phase) return phase_rows[i];
    return std::nullopt;
  }

  std::vector<SlaStatus> statuses() const {
    std::vector<SlaStatus> out;
    out.reserve(rows.size());
    for (const auto& r : rows) out.push_back(r.sla);
    return out;
  }
};

struct PhaseStats {
  std::string name;
  std::size_t first_row = 0;
  std::size_t rows = 0;
  double mean_reward = 0.0;
  double mean_reward_sla_unaware = 0.0;
  std::vector<std::optional<double>> violation_rate;         // whole phase
  std::vector<std::optional<double>> steady_violation_rate;  // tail of the phase
  std::vector<double> jam_fraction;                          // share of slots jamming slice k
  std::size_t budget_violations = 0;
};

struct AttackerStats {
  std::uint64_t train_slots = 0;
  std::size_t num_actions = 0;
  double eval_mean_nacks = 0.0;
  double random_mean_nacks = 0.0;
  std::vector<double> eval_jam_fraction;
  bool victim_unchanged = true;
};

struct BaselineComparison {
  double attack_mean_reward = 0.0;  // same slots, no jammer
  double final_reward = 0.0;
};

struct Summary {
  std::uint64_t seed = 0;
  std::uint64_t config_hash = 0;
  std::string code_version = kCodeVersion;
  std::vector<std::string> slice_names;
  std::vector<PhaseStats> phases;
  std::vector<double> clean_level;                   // clean steady-state violation per slice
  std::vector<std::optional<std::uint64_t>> recovery_time;
  std::vector<bool> recovered;
  double final_reward = 0.0;                         // mean of the last final_reward_slots
  std::optional<AttackerStats> attacker;
  std::optional<BaselineComparison> baseline;

  const PhaseStats* phase(const std::string& name) const {
    for (const auto& p : phases)
      if (p.name == name) return &p;
    return nullptr;
  }
};

/// Trailing moving average with a window of `span` samples (shorter at the start).
inline std::vector<double> moving_average(const std::vector<double>& xs, std::size_t span) {
  std::vector<double> out(xs.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sum += xs[i];
    if (i >= span) sum -= xs[i - span];
    out[i] = sum / static_cast<double>(std::min(i + 1, span));
  }
  return out;
}

/// Per-slot violation indicator of slice k (0 during warm-up).
inline std::vector<double> violation_series(const MetricsTrace& trace, std::size_t k) {
  std::vector<double> v(trace.rows.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    const auto& s = trace.rows[i].sla;
    v[i] = (s.window_full && !s.sla_ok.test(k)) ? 1.0 : 0.0;
  }
  return v;
}

inline std::vector<double> reward_series(const MetricsTrace& trace, bool sla_unaware = false) {
  std::vector<double> r(trace.rows.size());
  for (std::size_t i = 0; i < r.size(); ++i)
    r[i] = sla_unaware ? trace.rows[i].reward_sla_unaware : trace.rows[i].reward;
  return r;
}

/// Slots after the recovery phase starts until the windowed violation rate
/// of slice k drops to `threshold` and stays there for the rest of the phase.
inline std::optional<std::uint64_t> recovery_time(const std::vector<double>& windowed_violation,
                                                  std::size_t first, std::size_t last, double threshold) {
  if (first >= last) return std::nullopt;
  if (windowed_violation[last - 1] > threshold) return std::nullopt;
  std::size_t t = last - 1;
  while (t > first && windowed_violation[t - 1] <= threshold) --t;
  return static_cast<std::uint64_t>(t - first);
}

/// All state of one seeded run. Copyable, so a run can be forked.
class Simulation {
 public:
  Simulation(ExperimentConfig cfg, std::uint64_t seed)
      : cfg_(std::move(cfg)),
        seed_(seed),
        traffic_(TrafficStreams::derive(seed)),
        window_(cfg_.cell.num_slices(), cfg_.sla.window_len),
        victim_(1 + 2 * cfg_.cell.num_slices(), std::size_t{1} << cfg_.cell.num_slices(),
                cfg_.resolved_victim(), seed, "victim"),
        jam_actions_(enumerate_jam_actions(cfg_.cell, cfg_.attacker.jam_budget)) {
    cfg_.validate();
    state_ = initial_state(cfg_.cell, traffic_);
    seen_ = {0, cfg_.cell.total_rbs, SliceSet{}, std::vector<double>(cfg_.cell.num_slices(), 0.0)};
  }

  const ExperimentConfig& config() const { return cfg_; }
  const MetricsTrace& trace() const { return trace_; }
  const DdqnAgent& victim() const { return victim_; }
  const std::optional<DdqnAgent>& attacker() const { return attacker_; }
  const std::optional<AttackerStats>& attacker_stats() const { return attacker_stats_; }
  const std::vector<SliceSet>& jam_actions() const { return jam_actions_; }

  void run_phase(const PhaseConfig& phase) {
    if (phase.name == kPhaseAttackerPrep)
      train_attacker(phase.slots);
    else
      run_logged(phase);
  }

  /// Replaces the victim's networks, e.g. from a snapshot.
  void load_victim(const QNetwork& net) { victim_.load(net); }

 private:
  void train_attacker(std::uint64_t slots) {
    const QNetwork& frozen = victim_.online();
    const std::uint64_t before = frozen.parameter_hash();
    AttackerConfig acfg = cfg_.attacker;
    acfg.hyperparams = cfg_.resolved_attacker();
    attacker_ = train_surrogate_attacker(frozen, cfg_.cell, acfg, slots, seed_,
                                         TrafficStreams::derive(seed_, "prep-"));

    AttackerStats st;
    st.train_slots = slots;
    st.num_actions = jam_actions_.size();
    const std::uint64_t eval_slots = 5000;
    const DdqnAgent& trained = *attacker_;
    auto greedy = [&](std::span<const double> obs) { return trained.greedy(obs); };
    const auto ev = evaluate_jam_policy(frozen, cfg_.cell, cfg_.attacker.jam_budget, greedy, eval_slots,
                                        TrafficStreams::derive(seed_, "eval-"));
    Rng random_rng = substream(seed_, "attacker-random");
    auto random = [&](std::span<const double>) { return uniform_index(random_rng, jam_actions_.size()); };
    const auto rnd = evaluate_jam_policy(frozen, cfg_.cell, cfg_.attacker.jam_budget, random, eval_slots,
                                         TrafficStreams::derive(seed_, "eval-"));
    st.eval_mean_nacks = ev.mean_nacks;
    st.random_mean_nacks = rnd.mean_nacks;
    st.eval_jam_fraction = ev.jam_fraction;
    st.victim_unchanged = frozen.parameter_hash() == before;
    attacker_stats_ = st;
  }

  void run_logged(const PhaseConfig& phase) {
    const CellConfig& cell = cfg_.cell;
    const std::size_t phase_index = trace_.phase_names.size();
    trace_.phase_names.push_back(phase.name);
    const std::size_t first = trace_.rows.size();
    if (phase.attacker_active && !attacker_)
      attacker_.emplace(1 + cell.num_slices(), jam_actions_.size(), cfg_.resolved_attacker(), seed_, "attacker");

    for (std::uint64_t t = 0; t < phase.slots; ++t) {
      SlotRecord rec;
      rec.slot = state_.slot;
      rec.phase = phase_index;
      std::vector<double> obs = observe_victim(state_, cell);
      rec.victim_action = phase.victim_learning ? victim_.act(obs) : victim_.greedy(obs);
      if (phase.attacker_active) rec.jam_action = jam_actions_[attacker_->greedy(attacker_observe(seen_, cell))];

      auto [next, out] = step(cell, state_, SliceSet(static_cast<std::uint32_t>(rec.victim_action)),
                              rec.jam_action, traffic_);
      window_.push(out);
      rec.sla = evaluate_sla(window_, cell);
      rec.reward_sla_aware =
          victim_reward(out, state_.weights, rec.sla.sla_ok, cfg_.sla.lambda, RewardMode::kSlaAware);
      rec.reward_sla_unaware =
          victim_reward(out, state_.weights, rec.sla.sla_ok, cfg_.sla.lambda, RewardMode::kSlaUnaware);
      rec.reward = cfg_.sla.reward_mode == RewardMode::kSlaAware ? rec.reward_sla_aware : rec.reward_sla_unaware;
      if (phase.victim_learning)
        victim_.learn({std::move(obs), rec.victim_action, rec.reward, observe_victim(next, cell), {}});
      rec.weights = state_.weights;
      rec.outcome = std::move(out);
      trace_.rows.push_back(std::move(rec));
      seen_ = std::move(state_);
      state_ = std::move(next);
    }
    trace_.phase_rows.emplace_back(first, trace_.rows.size());
  }

  ExperimentConfig cfg_;
  std::uint64_t seed_;
  TrafficStreams traffic_;
  EnvState state_;
  EnvState seen_;  // previous slot, as the jammer witnessed it on the air
  SlaWindow window_;
  DdqnAgent victim_;
  std::optional<DdqnAgent> attacker_;
  std::vector<SliceSet> jam_actions_;
  MetricsTrace trace_;
  std::optional<AttackerStats> attacker_stats_;
};

inline PhaseStats phase_stats(const ExperimentConfig& cfg, const MetricsTrace& trace, std::size_t phase_index,
                              const std::vector<SlaStatus>& statuses) {
  const std::size_t K = cfg.cell.num_slices();
  PhaseStats ps;
  ps.name = trace.phase_names[phase_index];
  const auto [first, last] = trace.phase_rows[phase_index];
  ps.first_row = first;
  ps.rows = last - first;
  ps.violation_rate.assign(K, std::nullopt);
  ps.steady_violation_rate.assign(K, std::nullopt);
  ps.jam_fraction.assign(K, 0.0);
  if (ps.rows == 0) return ps;
  for (std::size_t i = first; i < last; ++i) {
    const auto& r = trace.rows[i];
    ps.mean_reward += r.reward;
    ps.mean_reward_sla_unaware += r.reward_sla_unaware;
    for (std::size_t k = 0; k < K; ++k)
      if (r.jam_action.test(k)) ps.jam_fraction[k] += 1.0;
    if (cfg.cell.demand(r.jam_action) > cfg.attacker.jam_budget) ++ps.budget_violations;
  }
  const double n = static_cast<double>(ps.rows);
  ps.mean_reward /= n;
  ps.mean_reward_sla_unaware /= n;
  for (double& f : ps.jam_fraction) f /= n;
  const auto tail = static_cast<std::size_t>(std::ceil(cfg.harness.steady_state_fraction * n));
  const std::size_t steady_first = last - std::max<std::size_t>(1, std::min(tail, ps.rows));
  for (std::size_t k = 0; k < K; ++k) {
    try {
      ps.violation_rate[k] = violation_rate(statuses, k, first, last);
      ps.steady_violation_rate[k] = violation_rate(statuses, k, steady_first, last);
    } catch (const std::invalid_argument&) {
      // only warm-up slots in range
    }
  }
  return ps;
}

inline Summary summarize(const ExperimentConfig& cfg, std::uint64_t seed, const MetricsTrace& trace) {
  const std::size_t K = cfg.cell.num_slices();
  Summary s;
  s.seed = seed;
  s.config_hash = config_hash(cfg);
  for (const auto& sl : cfg.cell.slices) s.slice_names.push_back(sl.name);
  const auto statuses = trace.statuses();
  for (std::size_t p = 0; p < trace.phase_names.size(); ++p) s.phases.push_back(phase_stats(cfg, trace, p, statuses));

  s.clean_level.assign(K, 0.0);
  if (const PhaseStats* clean = s.phase(kPhaseClean))
    for (std::size_t k = 0; k < K; ++k) s.clean_level[k] = clean->steady_violation_rate[k].value_or(0.0);

  s.recovery_time.assign(K, std::nullopt);
  s.recovered.assign(K, false);
  if (const auto rows = trace.rows_of(kPhaseRecovery)) {
    const PhaseStats* rec = s.phase(kPhaseRecovery);
    for (std::size_t k = 0; k < K; ++k) {
      const double threshold = s.clean_level[k] + cfg.harness.recovery_margin;
      const auto windowed = moving_average(violation_series(trace, k), cfg.harness.ma_span);
      s.recovery_time[k] = recovery_time(windowed, rows->first, rows->second, threshold);
      s.recovered[k] = rec->steady_violation_rate[k].value_or(0.0) <= threshold;
    }
    const std::size_t n = std::min(cfg.harness.final_reward_slots, rows->second - rows->first);
    double sum = 0.0;
    for (std::size_t i = rows->second - n; i < rows->second; ++i) sum += trace.rows[i].reward;
    s.final_reward = n ? sum / static_cast<double>(n) : 0.0;
  }
  return s;
}

struct RunResult {
  MetricsTrace trace;
  Summary summary;
  std::optional<MetricsTrace> baseline_trace;  // same run without the jammer
};

/// Runs every phase in order. With harness.paired_baseline the run is forked
/// just before the jammer is introduced and the fork continues without it, so
/// both branches share traffic and the clean-phase history.
inline RunResult run_experiment(const ExperimentConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  Simulation sim(cfg, seed);
  std::optional<Simulation> baseline;
  for (const auto& phase : cfg.phases) {
    const bool jammer_involved = phase.name == kPhaseAttackerPrep || phase.attacker_active;
    if (cfg.harness.paired_baseline && !baseline && jammer_involved && phase.slots > 0) baseline = sim;
    sim.run_phase(phase);
    if (baseline && phase.name != kPhaseAttackerPrep) {
      PhaseConfig quiet = phase;
      quiet.attacker_active = false;
      baseline->run_phase(quiet);
    }
  }
  RunResult result;
  result.summary = summarize(cfg, seed, sim.trace());
  result.summary.attacker = sim.attacker_stats();
  if (baseline) {
    const Summary b = summarize(cfg, seed, baseline->trace());
    BaselineComparison cmp;
    if (const PhaseStats* p = b.phase(kPhaseAttack)) cmp.attack_mean_reward = p->mean_reward;
    cmp.final_reward = b.final_reward;
    result.summary.baseline = cmp;
    result.baseline_trace = baseline->trace();
  }
  result.trace = sim.trace();
  return result;
}

}  // namespace ransim
