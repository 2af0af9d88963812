#include "dmaze/replay.hpp"

#include <stdexcept>

namespace dmaze {

ReplayBuffer::ReplayBuffer(std::size_t capacity, BufferKind kind)
    : capacity_(capacity), kind_(kind) {
  if (capacity == 0) throw std::invalid_argument("replay capacity must be positive");
}

void ReplayBuffer::push(Transition t) {
  if (!t.state.same_shape(t.next_state))
    throw std::invalid_argument("transition state and next_state differ in shape");
  const TensorShape s = shape_of(t.state);
  if (s.size() == 0 || t.state.values.size() != s.size() ||
      t.next_state.values.size() != s.size())
    throw std::invalid_argument("transition tensor has inconsistent size");
  if (shape_ && *shape_ != s)
    throw std::invalid_argument("transition shape differs from buffer shape");
  shape_ = s;
  if (records_.size() == capacity_) records_.pop_front();
  records_.push_back(std::move(t));
}

}  // namespace dmaze
