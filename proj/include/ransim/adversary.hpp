#pragma once

// Budget-constrained jammer. It never sees weights or the scheduler's
// decision: only the cell's RB count and slice activity it witnessed on the
// air, and the NACKs its jamming causes.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <vector>

#include "ransim/ddqn.hpp"
#include "ransim/slicing_env.hpp"

namespace ransim {

struct AttackerConfig {
  int jam_budget = 5;  // RBs
  AgentHyperparams hyperparams;
};

/// Every slice subset whose RB demand fits in `budget`, ascending by bitmask.
/// The empty mask is always first.
inline std::vector<SliceSet> enumerate_jam_actions(const CellConfig& cell, int budget) {
  std::vector<SliceSet> actions;
  const std::uint32_t limit = 1u << cell.num_slices();
  for (std::uint32_t bits = 0; bits < limit; ++bits) {
    const SliceSet mask(bits);
    if (cell.demand(mask) <= budget) actions.push_back(mask);
  }
  return actions;
}

/// [F(t)/F, a_1, ..., a_K] of the given slot.
inline std::vector<double> attacker_observe(const EnvState& state, const CellConfig& cell) {
  std::vector<double> obs;
  obs.reserve(1 + cell.num_slices());
  obs.push_back(static_cast<double>(state.available_rbs) / cell.total_rbs);
  for (std::size_t k = 0; k < cell.num_slices(); ++k) obs.push_back(state.activity.test(k) ? 1.0 : 0.0);
  return obs;
}

/// Number of NACKs the jammer detects: scheduled, active and jammed slices.
inline int attacker_reward(const SlotOutcome& outcome) { return outcome.nack_count; }

/// Picks a jam action from what the jammer can observe.
using JamPolicy = std::function<std::size_t(std::span<const double> attacker_obs)>;

struct AttackEvaluation {
  double mean_nacks = 0.0;
  std::vector<double> jam_fraction;  // per slice: share of slots whose jam mask included it
  std::size_t budget_violations = 0;
};

/// Runs `slots` slots of a greedy frozen victim against `policy` on its own
/// traffic streams. The jammer observes the previous slot's activity.
inline AttackEvaluation evaluate_jam_policy(const QNetwork& victim, const CellConfig& cell, int budget,
                                            const JamPolicy& policy, std::uint64_t slots,
                                            TrafficStreams traffic) {
  const auto jam_actions = enumerate_jam_actions(cell, budget);
  const auto all_victim = action_range(std::size_t{1} << cell.num_slices());
  AttackEvaluation ev;
  ev.jam_fraction.assign(cell.num_slices(), 0.0);
  EnvState state = initial_state(cell, traffic);
  EnvState seen{0, cell.total_rbs, SliceSet{}, std::vector<double>(cell.num_slices(), 0.0)};
  double nacks = 0.0;
  for (std::uint64_t t = 0; t < slots; ++t) {
    const std::size_t j = policy(attacker_observe(seen, cell));
    const SliceSet jam = jam_actions.at(j);
    if (cell.demand(jam) > budget) ++ev.budget_violations;
    for (std::size_t k = 0; k < cell.num_slices(); ++k)
      if (jam.test(k)) ev.jam_fraction[k] += 1.0;
    const std::size_t v = greedy_action(victim, observe_victim(state, cell), all_victim);
    auto [next, out] = step(cell, state, SliceSet(static_cast<std::uint32_t>(v)), jam, traffic);
    nacks += attacker_reward(out);
    seen = std::move(state);
    state = std::move(next);
  }
  if (slots > 0) {
    ev.mean_nacks = nacks / static_cast<double>(slots);
    for (double& f : ev.jam_fraction) f /= static_cast<double>(slots);
  }
  return ev;
}

/// Trains the jammer's DDQN against a frozen, greedy victim. The victim is
/// taken by const reference and its parameter hash is checked afterwards.
inline DdqnAgent train_surrogate_attacker(const QNetwork& frozen_victim, const CellConfig& cell,
                                          const AttackerConfig& cfg, std::uint64_t slots,
                                          std::uint64_t seed, TrafficStreams traffic) {
  const std::uint64_t victim_hash = frozen_victim.parameter_hash();
  const auto jam_actions = enumerate_jam_actions(cell, cfg.jam_budget);
  const auto all_victim = action_range(std::size_t{1} << cell.num_slices());

  DdqnAgent attacker(1 + cell.num_slices(), jam_actions.size(), cfg.hyperparams, seed, "attacker");
  EnvState state = initial_state(cell, traffic);
  EnvState seen{0, cell.total_rbs, SliceSet{}, std::vector<double>(cell.num_slices(), 0.0)};
  for (std::uint64_t t = 0; t < slots; ++t) {
    std::vector<double> obs = attacker_observe(seen, cell);
    const std::size_t j = attacker.act(obs);
    const std::size_t v = greedy_action(frozen_victim, observe_victim(state, cell), all_victim);
    auto [next, out] = step(cell, state, SliceSet(static_cast<std::uint32_t>(v)), jam_actions[j], traffic);
    attacker.learn({std::move(obs), j, static_cast<double>(attacker_reward(out)), attacker_observe(state, cell), {}});
    seen = std::move(state);
    state = std::move(next);
  }
  if (frozen_victim.parameter_hash() != victim_hash)
    throw std::logic_error("victim parameters changed during attacker training");
  return attacker;
}

}  // namespace ransim
