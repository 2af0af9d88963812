#pragma once

#include <memory>

#include "dmaze/maze.hpp"
#include "dmaze/observation.hpp"
#include "dmaze/replay.hpp"

namespace dmaze {

// A grid plus the scenario it is played under. Cheap to copy; the grid and
// scenario are shared and immutable.
struct Environment {
  std::shared_ptr<const MazeGrid> grid;
  std::shared_ptr<const ScenarioConfig> scenario;

  Environment(MazeGrid g, ScenarioConfig s)
      : grid(std::make_shared<const MazeGrid>(std::move(g))),
        scenario(std::make_shared<const ScenarioConfig>(std::move(s))) {
    scenario->validate();
  }

  MazeState reset(std::uint64_t seed,
                  StartRegion region = StartRegion::All) const {
    return dmaze::reset(grid, scenario, seed, region);
  }

  TensorShape observation_shape() const {
    return {channel_layout(*scenario).total(), grid->height(), grid->width()};
  }

  Representation representation() const { return scenario->representation; }
};

}  // namespace dmaze
