#pragma once

// Double-DQN machinery shared by the scheduler (victim) and the jammer.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "ransim/q_network.hpp"
#include "ransim/replay_buffer.hpp"
#include "ransim/rng.hpp"

namespace ransim {

/// Raised when a training step produces a non-finite loss or parameters.
class DivergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct AgentHyperparams {
  double learning_rate = 0.1;
  double gamma = 0.9;
  double epsilon_start = 1.0;
  double epsilon_end = 0.05;
  std::uint64_t epsilon_decay_slots = 0;  // 0: half of the agent's first training phase
  std::size_t batch_size = 32;
  std::size_t buffer_capacity = 10000;
  std::size_t learn_start = 500;          // transitions stored before the first update
  std::uint64_t target_sync_slots = 200;
  std::vector<std::size_t> hidden = {64, 64};

  void validate(const std::string& who) const {
    auto fail = [&](const std::string& field, const std::string& what) {
      throw std::invalid_argument(who + "." + field + ": " + what);
    };
    if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) fail("learning_rate", "must be > 0");
    if (!(gamma >= 0.0 && gamma < 1.0)) fail("gamma", "must lie in [0,1)");
    if (!(epsilon_start >= 0.0 && epsilon_start <= 1.0)) fail("epsilon_start", "must lie in [0,1]");
    if (!(epsilon_end >= 0.0 && epsilon_end <= 1.0)) fail("epsilon_end", "must lie in [0,1]");
    if (batch_size == 0) fail("batch_size", "must be positive");
    if (buffer_capacity < batch_size) fail("buffer_capacity", "must be >= batch_size");
    if (learn_start > buffer_capacity) fail("learn_start", "must be <= buffer_capacity");
    if (target_sync_slots == 0) fail("target_sync_slots", "must be positive");
    for (std::size_t h : hidden)
      if (h == 0) fail("hidden", "layer widths must be positive");
  }
};

/// Linear decay from `start` to `end` over `decay_slots`, then flat.
struct EpsilonSchedule {
  double start = 1.0;
  double end = 0.05;
  std::uint64_t decay_slots = 1;

  double at(std::uint64_t slot) const {
    if (decay_slots == 0 || slot >= decay_slots) return end;
    const double frac = static_cast<double>(slot) / static_cast<double>(decay_slots);
    return start + (end - start) * frac;
  }
};

/// 0, 1, ..., n-1.
inline std::vector<std::size_t> action_range(std::size_t n) {
  std::vector<std::size_t> out(n);
  std::iota(out.begin(), out.end(), std::size_t{0});
  return out;
}

/// Index of the largest value among `candidates`; lowest index wins ties.
/// An empty candidate list means every index.
inline std::size_t masked_argmax(const Eigen::VectorXd& values, std::span<const std::size_t> candidates) {
  std::size_t best = std::numeric_limits<std::size_t>::max();
  double best_value = -std::numeric_limits<double>::infinity();
  auto consider = [&](std::size_t i) {
    if (i >= static_cast<std::size_t>(values.size()))
      throw std::out_of_range("masked_argmax: action index out of range");
    if (best == std::numeric_limits<std::size_t>::max() || values(i) > best_value ||
        (values(i) == best_value && i < best)) {
      best = i;
      best_value = values(i);
    }
  };
  if (candidates.empty()) {
    for (Eigen::Index i = 0; i < values.size(); ++i) consider(static_cast<std::size_t>(i));
  } else {
    for (std::size_t i : candidates) consider(i);
  }
  return best;
}

inline std::size_t greedy_action(const QNetwork& net, std::span<const double> obs,
                                 std::span<const std::size_t> feasible) {
  if (feasible.empty()) throw std::invalid_argument("select_action: empty feasible action set");
  return masked_argmax(net.forward(obs), feasible);
}

/// Epsilon-greedy over `feasible`. With epsilon <= 0 the rng is not touched.
inline std::size_t select_action(const QNetwork& net, std::span<const double> obs, double epsilon,
                                 std::span<const std::size_t> feasible, Rng& rng) {
  if (feasible.empty()) throw std::invalid_argument("select_action: empty feasible action set");
  if (epsilon > 0.0 && uniform01(rng) < epsilon) return feasible[uniform_index(rng, feasible.size())];
  return greedy_action(net, obs, feasible);
}

inline Eigen::MatrixXd stack_columns(std::span<const Transition> batch, bool next) {
  const std::size_t dim = next ? batch.front().next_obs.size() : batch.front().obs.size();
  Eigen::MatrixXd m(dim, batch.size());
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const auto& v = next ? batch[i].next_obs : batch[i].obs;
    if (v.size() != dim) throw std::invalid_argument("transition batch has ragged observations");
    m.col(static_cast<Eigen::Index>(i)) = Eigen::Map<const Eigen::VectorXd>(v.data(), v.size());
  }
  return m;
}

/// y_i = r_i + gamma * Q_target(s'_i, argmax_{a in feasible'} Q_online(s'_i, a)).
inline std::vector<double> double_q_targets(const QNetwork& online, const QNetwork& target,
                                            std::span<const Transition> batch, double gamma) {
  if (!online.same_architecture(target))
    throw std::invalid_argument("double_q_targets: online/target architecture mismatch");
  std::vector<double> y(batch.size());
  if (batch.empty()) return y;
  const Eigen::MatrixXd next = stack_columns(batch, true);
  const Eigen::MatrixXd q_online = online.forward_batch(next);
  const Eigen::MatrixXd q_target = target.forward_batch(next);
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const Eigen::VectorXd col = q_online.col(static_cast<Eigen::Index>(i));
    const std::size_t a_star = masked_argmax(col, batch[i].next_feasible);
    y[i] = batch[i].reward + gamma * q_target(static_cast<Eigen::Index>(a_star), static_cast<Eigen::Index>(i));
  }
  return y;
}

inline double double_q_target(const QNetwork& online, const QNetwork& target, const Transition& t,
                              double gamma) {
  return double_q_targets(online, target, std::span<const Transition>(&t, 1), gamma).front();
}

struct LossAndGradient {
  double loss = 0.0;
  Parameters gradient;
};

/// L = mean_i 0.5 * (Q(s_i, a_i) - y_i)^2 with the targets held fixed.
inline LossAndGradient td_loss_and_gradient(const QNetwork& online, std::span<const Transition> batch,
                                            std::span<const double> targets) {
  if (batch.empty()) throw std::invalid_argument("train_step: empty batch");
  if (targets.size() != batch.size()) throw std::invalid_argument("train_step: target count mismatch");
  const Eigen::MatrixXd inputs = stack_columns(batch, false);
  const Eigen::MatrixXd q = online.forward_batch(inputs);
  Eigen::MatrixXd err = Eigen::MatrixXd::Zero(q.rows(), q.cols());
  const double n = static_cast<double>(batch.size());
  LossAndGradient out;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const auto a = static_cast<Eigen::Index>(batch[i].action);
    if (a >= q.rows()) throw std::out_of_range("train_step: action index out of range");
    const auto col = static_cast<Eigen::Index>(i);
    const double e = q(a, col) - targets[i];
    out.loss += 0.5 * e * e / n;
    err(a, col) += e / n;
  }
  out.gradient = online.backward(inputs, err);
  return out;
}

/// One SGD step of size alpha on the double-Q regression loss. Returns the
/// loss measured before the step.
inline double train_step(QNetwork& online, const QNetwork& target, std::span<const Transition> batch,
                         double alpha, double gamma) {
  const std::vector<double> y = double_q_targets(online, target, batch, gamma);
  LossAndGradient lg = td_loss_and_gradient(online, batch, y);
  if (!std::isfinite(lg.loss)) throw DivergenceError("training diverged: non-finite loss");
  online.apply_gradient(lg.gradient, alpha);
  if (!online.params().all_finite())
    throw DivergenceError("training diverged: non-finite parameters after update");
  return lg.loss;
}

inline void sync_target(const QNetwork& online, QNetwork& target) {
  if (!online.same_architecture(target))
    throw std::invalid_argument("sync_target: architecture mismatch");
  target.params() = online.params();
}

/// Online/target networks, replay memory and exploration state of one agent.
class DdqnAgent {
 public:
  DdqnAgent(std::size_t obs_dim, std::size_t num_actions, AgentHyperparams hp,
            std::uint64_t seed, const std::string& name)
      : hp_(std::move(hp)),
        init_rng_(substream(seed, name + "-init")),
        online_(make_network(obs_dim, num_actions)),
        target_(online_),
        buffer_(hp_.buffer_capacity),
        explore_rng_(substream(seed, name + "-explore")),
        replay_rng_(substream(seed, name + "-replay")),
        schedule_{hp_.epsilon_start, hp_.epsilon_end, hp_.epsilon_decay_slots} {
    all_actions_ = action_range(num_actions);
  }

  const AgentHyperparams& hyperparams() const { return hp_; }
  const QNetwork& online() const { return online_; }
  const QNetwork& target() const { return target_; }
  const ReplayBuffer& buffer() const { return buffer_; }
  std::size_t num_actions() const { return all_actions_.size(); }
  std::uint64_t learning_slots() const { return learning_slots_; }
  std::uint64_t train_steps() const { return train_steps_; }
  double last_loss() const { return last_loss_; }

  void load(const QNetwork& net) {
    if (!net.same_architecture(online_)) throw std::invalid_argument("agent snapshot: architecture mismatch");
    online_ = net;
    target_ = net;
  }

  double epsilon() const { return schedule_.at(learning_slots_); }

  /// Exploring action during learning; advances the epsilon schedule.
  std::size_t act(std::span<const double> obs) {
    const double eps = epsilon();
    ++learning_slots_;
    return select_action(online_, obs, eps, all_actions_, explore_rng_);
  }

  std::size_t greedy(std::span<const double> obs) const { return greedy_action(online_, obs, all_actions_); }

  /// Stores a transition and performs one update once the memory is warm.
  void learn(Transition t) {
    buffer_.push(std::move(t));
    if (buffer_.size() < std::max(hp_.learn_start, hp_.batch_size)) return;
    const auto batch = buffer_.sample(hp_.batch_size, replay_rng_);
    last_loss_ = train_step(online_, target_, batch, hp_.learning_rate, hp_.gamma);
    if (++train_steps_ % hp_.target_sync_slots == 0) sync_target(online_, target_);
  }

 private:
  QNetwork make_network(std::size_t obs_dim, std::size_t num_actions) {
    std::vector<std::size_t> dims{obs_dim};
    dims.insert(dims.end(), hp_.hidden.begin(), hp_.hidden.end());
    dims.push_back(num_actions);
    return QNetwork::random(dims, init_rng_);
  }

  AgentHyperparams hp_;
  Rng init_rng_;
  QNetwork online_;
  QNetwork target_;
  ReplayBuffer buffer_;
  Rng explore_rng_;
  Rng replay_rng_;
  EpsilonSchedule schedule_;
  std::vector<std::size_t> all_actions_;
  std::uint64_t learning_slots_ = 0;
  std::uint64_t train_steps_ = 0;
  double last_loss_ = 0.0;
};

}  // namespace ransim
