#pragma once

#include "augwm/core_types.hpp"

#include <cstddef>
#include <vector>

namespace augwm {

/// Fixed-capacity FIFO ring of transitions; the oldest entry is overwritten
/// once full.
class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity);

  void push(Transition t);
  std::size_t size() const { return items_.size(); }
  std::size_t capacity() const { return capacity_; }
  bool empty() const { return items_.empty(); }
  /// Slot i in storage order (not insertion order once wrapped).
  const Transition& operator[](std::size_t i) const { return items_[i]; }
  /// Next slot to be written.
  std::size_t cursor() const { return cursor_; }

 private:
  std::size_t capacity_;
  std::size_t cursor_ = 0;
  std::vector<Transition> items_;
};

}  // namespace augwm
