#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "ransim/rng.hpp"

namespace ransim {

struct Transition {
  std::vector<double> obs;
  std::size_t action = 0;
  double reward = 0.0;
  std::vector<double> next_obs;
  std::vector<std::size_t> next_feasible;  // empty means every action
};

/// Fixed-capacity FIFO of transitions with uniform sampling.
class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
    if (capacity == 0) throw std::invalid_argument("ReplayBuffer capacity must be positive");
    items_.reserve(capacity);
  }

  std::size_t capacity() const { return capacity_; }
  std::size_t size() const { return items_.size(); }
  bool empty() const { return items_.empty(); }

  void push(Transition t) {
    if (items_.size() < capacity_) {
      items_.push_back(std::move(t));
      return;
    }
    items_[oldest_] = std::move(t);
    oldest_ = (oldest_ + 1) % capacity_;
  }

  /// i-th stored transition, oldest first.
  const Transition& at(std::size_t i) const {
    if (i >= items_.size()) throw std::out_of_range("ReplayBuffer::at");
    return items_[(oldest_ + i) % items_.size()];
  }

  /// n draws, uniform with replacement, so n may exceed size().
  std::vector<Transition> sample(std::size_t n, Rng& rng) const {
    if (items_.empty()) throw std::invalid_argument("ReplayBuffer::sample: buffer is empty");
    std::vector<Transition> batch;
    batch.reserve(n);
    for (std::size_t i = 0; i < n; ++i) batch.push_back(items_[uniform_index(rng, items_.size())]);
    return batch;
  }

 private:
  std::size_t capacity_;
  std::vector<Transition> items_;
  std::size_t oldest_ = 0;
};

}  // namespace ransim
