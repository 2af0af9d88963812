#pragma once

#include <cstdint>
#include <deque>
#include <optional>

#include "dmaze/maze.hpp"
#include "dmaze/observation.hpp"

namespace dmaze {

struct Transition {
  ObservationTensor state;
  Action action = Action::Up;
  float reward = 0.0f;
  ObservationTensor next_state;
  bool terminal = false;  // goal reached; time-limit truncation is not terminal

  friend bool operator==(const Transition&, const Transition&) = default;
};

enum class BufferKind : std::uint8_t { Real = 0, Dreamed = 1 };

struct TensorShape {
  int channels = 0;
  int height = 0;
  int width = 0;
  std::size_t size() const {
    return static_cast<std::size_t>(channels) * height * width;
  }
  friend bool operator==(const TensorShape&, const TensorShape&) = default;
};

inline TensorShape shape_of(const ObservationTensor& t) {
  return {t.channels, t.height, t.width};
}

// Capacity-bounded FIFO of transitions. All records share one tensor shape.
class ReplayBuffer {
 public:
  ReplayBuffer(std::size_t capacity, BufferKind kind);

  // Evicts the oldest record when full. Throws std::invalid_argument when the
  // record's shapes disagree with each other or with the buffer.
  void push(Transition t);

  std::size_t size() const { return records_.size(); }
  bool empty() const { return records_.empty(); }
  std::size_t capacity() const { return capacity_; }
  BufferKind kind() const { return kind_; }
  std::optional<TensorShape> shape() const { return shape_; }

  const Transition& operator[](std::size_t i) const { return records_[i]; }
  auto begin() const { return records_.begin(); }
  auto end() const { return records_.end(); }

  friend bool operator==(const ReplayBuffer&, const ReplayBuffer&) = default;

 private:
  std::size_t capacity_;
  BufferKind kind_;
  std::optional<TensorShape> shape_;
  std::deque<Transition> records_;
};

}  // namespace dmaze
