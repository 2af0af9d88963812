#pragma once
// Encoding of maze states into observation tensors.
//
// Content channels depend on the representation:
//   raw        3 planes: walls, player, goal
//   grayscale  1 plane:  wall 0.33, goal 0.66, player 1.0
//   rgb        3 planes: R = player, G = goal, B = walls
// Partially observable scenarios append a visibility channel (1 = seen,
// kMaskValue = unseen; unseen cells carry kMaskValue on every channel).
// The timed scenario appends a solution overlay channel after that.

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "dmaze/maze.hpp"

namespace dmaze {

inline constexpr float kMaskValue = 0.5f;
inline constexpr float kWallIntensity = 0.33f;
inline constexpr float kGoalIntensity = 0.66f;
inline constexpr float kPlayerIntensity = 1.0f;

struct ObservationTensor {
  int channels = 0;
  int height = 0;
  int width = 0;
  std::vector<float> values;  // channel-major, then row-major

  ObservationTensor() = default;
  ObservationTensor(int c, int h, int w, float fill = 0.0f)
      : channels(c), height(h), width(w),
        values(static_cast<std::size_t>(c) * h * w, fill) {}

  std::size_t size() const { return values.size(); }
  std::size_t plane_size() const {
    return static_cast<std::size_t>(height) * width;
  }
  float& at(int c, int y, int x) {
    return values[static_cast<std::size_t>(c) * plane_size() +
                  static_cast<std::size_t>(y) * width + x];
  }
  float at(int c, int y, int x) const {
    return values[static_cast<std::size_t>(c) * plane_size() +
                  static_cast<std::size_t>(y) * width + x];
  }
  bool same_shape(const ObservationTensor& o) const {
    return channels == o.channels && height == o.height && width == o.width;
  }
  std::span<const float> plane(int c) const {
    return std::span<const float>(values).subspan(
        static_cast<std::size_t>(c) * plane_size(), plane_size());
  }

  friend bool operator==(const ObservationTensor&,
                         const ObservationTensor&) = default;
};

struct ChannelLayout {
  int content = 0;
  bool visibility = false;
  bool overlay = false;

  int total() const { return content + (visibility ? 1 : 0) + (overlay ? 1 : 0); }
  int visibility_channel() const { return visibility ? content : -1; }
  int overlay_channel() const {
    return overlay ? content + (visibility ? 1 : 0) : -1;
  }
};

ChannelLayout channel_layout(const ScenarioConfig& scenario,
                             Representation representation);
inline ChannelLayout channel_layout(const ScenarioConfig& scenario) {
  return channel_layout(scenario, scenario.representation);
}

int content_channels(Representation representation);
int player_channel(Representation representation);

// Fully visible encoding. Extra channels follow the state's scenario: the
// visibility channel (if any) is all ones, the overlay channel all zeros.
ObservationTensor observe_full(const MazeState& state,
                               Representation representation);

// Cells with Chebyshev distance > radius from the player are masked.
ObservationTensor observe_radius(const MazeState& state, int radius);

// A cell is visible when inside the radius ball and the Bresenham line from
// the player to it crosses no wall before reaching it.
ObservationTensor observe_raytrace(const MazeState& state, int radius);

// Marks the shortest player->goal path on the overlay channel with intensity
// 1 - step_count / fade_steps while step_count < fade_steps.
ObservationTensor apply_solution_fade(ObservationTensor obs,
                                      const MazeState& state, int fade_steps);

// Scenario-driven encoding: the observation an agent receives.
ObservationTensor observe(const MazeState& state);

// Per-cell visibility flags (row-major) behind observe_radius/observe_raytrace.
std::vector<std::uint8_t> radius_visibility(const MazeGrid& grid, Cell from,
                                            int radius);
std::vector<std::uint8_t> raytrace_visibility(const MazeGrid& grid, Cell from,
                                              int radius);

// Cells visited by the integer Bresenham walk from a to b, both inclusive.
std::vector<Cell> bresenham_line(Cell a, Cell b);

std::array<float, kNumActions> encode_action(Action action);
// Inverse of encode_action (argmax of the vector).
Action decode_action(std::span<const float> one_hot);

// Argmax cell of the player plane. Ties resolve to the first cell in
// row-major order.
Cell player_position(const ObservationTensor& obs,
                     Representation representation);

}  // namespace dmaze
