#include "dmaze/observation.hpp"

#include <algorithm>
#include <cstdlib>
#include <stdexcept>

namespace dmaze {

int content_channels(Representation representation) {
  return representation == Representation::Grayscale ? 1 : 3;
}

int player_channel(Representation representation) {
  switch (representation) {
    case Representation::Raw: return 1;
    case Representation::Grayscale: return 0;
    case Representation::Rgb: return 0;
  }
  return 0;
}

ChannelLayout channel_layout(const ScenarioConfig& scenario,
                             Representation representation) {
  return ChannelLayout{content_channels(representation),
                       scenario.partially_observable(),
                       scenario.has_solution_overlay()};
}

ObservationTensor observe_full(const MazeState& state,
                               Representation representation) {
  const MazeGrid& grid = *state.grid;
  const ChannelLayout layout = channel_layout(*state.scenario, representation);
  ObservationTensor obs(layout.total(), grid.height(), grid.width());

  for (int y = 0; y < grid.height(); ++y) {
    for (int x = 0; x < grid.width(); ++x) {
      const Cell c{x, y};
      const bool wall = grid.is_wall(c);
      const bool player = c == state.player;
      const bool goal = c == state.goal;
      switch (representation) {
        case Representation::Raw:
          obs.at(0, y, x) = wall ? 1.0f : 0.0f;
          obs.at(1, y, x) = player ? 1.0f : 0.0f;
          obs.at(2, y, x) = goal ? 1.0f : 0.0f;
          break;
        case Representation::Grayscale:
          obs.at(0, y, x) = player ? kPlayerIntensity
                            : goal ? kGoalIntensity
                            : wall ? kWallIntensity
                                   : 0.0f;
          break;
        case Representation::Rgb:
          obs.at(0, y, x) = player ? 1.0f : 0.0f;
          obs.at(1, y, x) = goal ? 1.0f : 0.0f;
          obs.at(2, y, x) = wall ? 1.0f : 0.0f;
          break;
      }
      if (layout.visibility) obs.at(layout.visibility_channel(), y, x) = 1.0f;
    }
  }
  return obs;
}

namespace {

void check_radius(int radius) {
  if (radius < 1) throw std::invalid_argument("vision radius must be >= 1");
}

ObservationTensor apply_mask(ObservationTensor obs,
                             const std::vector<std::uint8_t>& visible) {
  const std::size_t plane = obs.plane_size();
  for (std::size_t i = 0; i < plane; ++i) {
    if (visible[i]) continue;
    for (int c = 0; c < obs.channels; ++c)
      obs.values[static_cast<std::size_t>(c) * plane + i] = kMaskValue;
  }
  return obs;
}

int chebyshev(Cell a, Cell b) {
  return std::max(std::abs(a.x - b.x), std::abs(a.y - b.y));
}

}  // namespace

std::vector<std::uint8_t> radius_visibility(const MazeGrid& grid, Cell from,
                                            int radius) {
  check_radius(radius);
  std::vector<std::uint8_t> visible(grid.cell_count(), 0);
  for (std::size_t i = 0; i < visible.size(); ++i)
    visible[i] = chebyshev(grid.cell_at(i), from) <= radius ? 1 : 0;
  return visible;
}

std::vector<Cell> bresenham_line(Cell a, Cell b) {
  std::vector<Cell> cells;
  const int dx = std::abs(b.x - a.x);
  const int dy = -std::abs(b.y - a.y);
  const int sx = a.x < b.x ? 1 : -1;
  const int sy = a.y < b.y ? 1 : -1;
  int err = dx + dy;
  Cell c = a;
  while (true) {
    cells.push_back(c);
    if (c == b) break;
    const int e2 = 2 * err;
    if (e2 >= dy) {
      err += dy;
      c.x += sx;
    }
    if (e2 <= dx) {
      err += dx;
      c.y += sy;
    }
  }
  return cells;
}

std::vector<std::uint8_t> raytrace_visibility(const MazeGrid& grid, Cell from,
                                              int radius) {
  std::vector<std::uint8_t> visible = radius_visibility(grid, from, radius);
  for (std::size_t i = 0; i < visible.size(); ++i) {
    if (!visible[i]) continue;
    const Cell target = grid.cell_at(i);
    const auto line = bresenham_line(from, target);
    // The endpoint itself may be a wall (walls are seen), anything before it
    // blocks the ray.
    for (std::size_t k = 0; k + 1 < line.size(); ++k) {
      if (grid.is_wall(line[k])) {
        visible[i] = 0;
        break;
      }
    }
  }
  return visible;
}

ObservationTensor observe_radius(const MazeState& state, int radius) {
  return apply_mask(observe_full(state, state.scenario->representation),
                    radius_visibility(*state.grid, state.player, radius));
}

ObservationTensor observe_raytrace(const MazeState& state, int radius) {
  return apply_mask(observe_full(state, state.scenario->representation),
                    raytrace_visibility(*state.grid, state.player, radius));
}

ObservationTensor apply_solution_fade(ObservationTensor obs,
                                      const MazeState& state, int fade_steps) {
  if (!state.scenario->has_solution_overlay())
    throw std::invalid_argument(
        "solution fade requires the timed-limited-pomdp scenario");
  if (fade_steps < 0) throw std::invalid_argument("fade steps must be >= 0");
  if (state.step_count >= fade_steps) return obs;

  const ChannelLayout layout = channel_layout(*state.scenario);
  const int ch = layout.overlay_channel();
  if (obs.channels != layout.total())
    throw std::invalid_argument("observation lacks the overlay channel");
  const float intensity =
      1.0f - static_cast<float>(state.step_count) / static_cast<float>(fade_steps);
  for (const Cell c : optimal_path(*state.grid, state.player, state.goal))
    obs.at(ch, c.y, c.x) = intensity;
  return obs;
}

ObservationTensor observe(const MazeState& state) {
  const ScenarioConfig& sc = *state.scenario;
  if (!sc.partially_observable())
    return observe_full(state, sc.representation);
  const int radius = sc.vision_radius.value_or(1);
  ObservationTensor obs = sc.vision_kind == VisionKind::Raytrace
                              ? observe_raytrace(state, radius)
                              : observe_radius(state, radius);
  if (sc.has_solution_overlay())
    obs = apply_solution_fade(std::move(obs), state,
                              sc.solution_fade_steps.value_or(0));
  return obs;
}

std::array<float, kNumActions> encode_action(Action action) {
  std::array<float, kNumActions> v{};
  v[static_cast<std::size_t>(action_index(action))] = 1.0f;
  return v;
}

Action decode_action(std::span<const float> one_hot) {
  if (one_hot.size() != kNumActions)
    throw std::invalid_argument("action vector must have 4 entries");
  const auto it = std::max_element(one_hot.begin(), one_hot.end());
  return action_from_index(static_cast<int>(it - one_hot.begin()));
}

Cell player_position(const ObservationTensor& obs,
                     Representation representation) {
  const auto plane = obs.plane(player_channel(representation));
  const auto it = std::max_element(plane.begin(), plane.end());
  const auto idx = static_cast<std::size_t>(it - plane.begin());
  return Cell{static_cast<int>(idx % static_cast<std::size_t>(obs.width)),
              static_cast<int>(idx / static_cast<std::size_t>(obs.width))};
}

}  // namespace dmaze
