#include <doctest.h>

#include "dmaze/observation.hpp"

using namespace dmaze;

namespace {

MazeState make_state(const MazeGrid& grid, Cell player, Cell goal, ScenarioConfig sc = {},
                     int step_count = 0) {
  return MazeState{std::make_shared<const MazeGrid>(grid),
                   std::make_shared<const ScenarioConfig>(sc), player, goal, step_count};
}

std::vector<float> plane_copy(const ObservationTensor& o, int c) {
  auto p = o.plane(c);
  return {p.begin(), p.end()};
}

ScenarioConfig pomdp(int radius, VisionKind kind = VisionKind::Radius) {
  ScenarioConfig sc;
  sc.mode = ScenarioMode::Pomdp;
  sc.vision_radius = radius;
  sc.vision_kind = kind;
  return sc;
}

MazeGrid grid_from(int w, int h, const std::vector<std::uint8_t>& walls) {
  return MazeGrid(w, h, 0, MazeStyle::Open, walls);
}

}  // namespace

TEST_CASE("raw player plane on the 2x2 walk") {
  const MazeGrid g = generate_maze(2, 2, 0, MazeStyle::Open);
  const auto s0 = observe(make_state(g, {0, 0}, {1, 1}));
  CHECK(s0.channels == 3);
  CHECK(plane_copy(s0, 1) == std::vector<float>{1, 0, 0, 0});
  const auto s2 = observe(make_state(g, {1, 1}, {1, 1}));
  CHECK(plane_copy(s2, 1) == std::vector<float>{0, 0, 0, 1});
}

TEST_CASE("representations agree on the player cell") {
  const MazeGrid g = generate_maze(9, 9, 3, MazeStyle::Perfect);
  const auto open = g.open_cells();
  for (std::size_t i = 0; i + 1 < open.size(); i += 5) {
    const MazeState s = make_state(g, open[i], open.back());
    for (auto rep : {Representation::Raw, Representation::Grayscale, Representation::Rgb})
      CHECK(player_position(observe_full(s, rep), rep) == open[i]);
  }
}

TEST_CASE("grayscale and rgb encodings") {
  const MazeGrid g = grid_from(3, 2, {0, 1, 0, 0, 0, 0});
  const MazeState s = make_state(g, {0, 0}, {2, 0});
  const auto gray = observe_full(s, Representation::Grayscale);
  CHECK(gray.channels == 1);
  CHECK(plane_copy(gray, 0) ==
        std::vector<float>{kPlayerIntensity, kWallIntensity, kGoalIntensity, 0, 0, 0});
  const auto rgb = observe_full(s, Representation::Rgb);
  CHECK(plane_copy(rgb, 0) == std::vector<float>{1, 0, 0, 0, 0, 0});
  CHECK(plane_copy(rgb, 1) == std::vector<float>{0, 0, 1, 0, 0, 0});
  CHECK(plane_copy(rgb, 2) == std::vector<float>{0, 1, 0, 0, 0, 0});
}

TEST_CASE("radius vision: centered 7x7 with radius 3 masks nothing") {
  const MazeGrid g = generate_maze(7, 7, 0, MazeStyle::Open);
  const auto obs = observe(make_state(g, {3, 3}, {6, 6}, pomdp(3)));
  CHECK(obs.channels == 4);
  for (float v : obs.plane(3)) CHECK(v == 1.0f);
}

TEST_CASE("radius vision: corner radius 1 shows the 2x2 corner block") {
  const MazeGrid g = generate_maze(5, 5, 0, MazeStyle::Open);
  const auto obs = observe(make_state(g, {0, 0}, {4, 4}, pomdp(1)));
  for (int y = 0; y < 5; ++y)
    for (int x = 0; x < 5; ++x) {
      const bool seen = x <= 1 && y <= 1;
      CHECK(obs.at(3, y, x) == (seen ? 1.0f : kMaskValue));
      if (!seen)
        for (int c = 0; c < 3; ++c) CHECK(obs.at(c, y, x) == kMaskValue);
    }
}

TEST_CASE("radius vision covering the grid equals the full view on content") {
  const MazeGrid g = generate_maze(6, 4, 9, MazeStyle::Perfect);
  const auto open = g.open_cells();
  const MazeState s = make_state(g, open.front(), open.back(), pomdp(6));
  const auto masked = observe(s);
  const auto full = observe_full(s, Representation::Raw);
  for (int c = 0; c < 3; ++c) CHECK(plane_copy(masked, c) == plane_copy(full, c));
}

TEST_CASE("masked cell count equals grid minus the Chebyshev ball") {
  for (int w = 2; w <= 8; ++w)
    for (int h = 2; h <= 8; h += 2)
      for (int r = 1; r <= 3; ++r) {
        const MazeGrid g = generate_maze(w, h, 0, MazeStyle::Open);
        for (int y = 0; y < h; ++y)
          for (int x = 0; x < w; ++x) {
            const auto vis = radius_visibility(g, {x, y}, r);
            const int bw = std::min(w - 1, x + r) - std::max(0, x - r) + 1;
            const int bh = std::min(h - 1, y + r) - std::max(0, y - r) + 1;
            const auto masked = std::count(vis.begin(), vis.end(), 0);
            CHECK(masked == w * h - bw * bh);
          }
      }
}

TEST_CASE("raytrace equals radius vision without occluders") {
  const MazeGrid g = generate_maze(9, 7, 0, MazeStyle::Open);
  for (int r = 1; r <= 5; ++r) {
    const MazeState a = make_state(g, {2, 3}, {8, 6}, pomdp(r, VisionKind::Radius));
    const MazeState b = make_state(g, {2, 3}, {8, 6}, pomdp(r, VisionKind::Raytrace));
    CHECK(observe(a) == observe(b));
  }
}

TEST_CASE("raytrace: a wall right of the player hides the rest of the row") {
  std::vector<std::uint8_t> walls(7 * 3, 0);
  walls[1 * 7 + 2] = 1;  // wall at (2,1), player at (1,1)
  const MazeGrid g = grid_from(7, 3, walls);
  const auto vis = raytrace_visibility(g, {1, 1}, 6);
  CHECK(vis[g.index({1, 1})] == 1);
  CHECK(vis[g.index({2, 1})] == 1);  // the wall itself is seen
  for (int x = 3; x < 7; ++x) CHECK(vis[g.index({x, 1})] == 0);
}

TEST_CASE("raytrace visibility is a subset of radius visibility; player always visible") {
  const MazeGrid g = generate_maze(11, 11, 17, MazeStyle::Perfect);
  for (Cell p : g.open_cells()) {
    const auto ray = raytrace_visibility(g, p, 3);
    const auto rad = radius_visibility(g, p, 3);
    CHECK(ray[g.index(p)] == 1);
    for (std::size_t i = 0; i < ray.size(); ++i)
      if (ray[i]) CHECK(rad[i] == 1);
  }
}

TEST_CASE("bresenham lines are 8-connected and symmetric in length") {
  for (int x = -4; x <= 4; ++x)
    for (int y = -4; y <= 4; ++y) {
      const auto line = bresenham_line({0, 0}, {x, y});
      CHECK(line.front() == Cell{0, 0});
      CHECK(line.back() == Cell{x, y});
      CHECK(static_cast<int>(line.size()) == std::max(std::abs(x), std::abs(y)) + 1);
      for (std::size_t i = 1; i < line.size(); ++i) {
        CHECK(std::abs(line[i].x - line[i - 1].x) <= 1);
        CHECK(std::abs(line[i].y - line[i - 1].y) <= 1);
      }
    }
}

TEST_CASE("solution overlay fades linearly") {
  const MazeGrid g = generate_maze(5, 5, 0, MazeStyle::Open);
  ScenarioConfig sc;
  sc.mode = ScenarioMode::TimedLimitedPomdp;
  sc.vision_radius = 10;
  sc.time_limit = 40;
  sc.solution_fade_steps = 8;
  const Cell player{0, 0}, goal{4, 4};
  const auto path = optimal_path(g, player, goal);

  const auto at0 = observe(make_state(g, player, goal, sc, 0));
  CHECK(at0.channels == 5);
  for (Cell c : path) CHECK(at0.at(4, c.y, c.x) == 1.0f);

  const auto mid = observe(make_state(g, player, goal, sc, 4));
  for (Cell c : path) CHECK(mid.at(4, c.y, c.x) == doctest::Approx(0.5f));

  const MazeState done = make_state(g, player, goal, sc, 8);
  const auto base = observe_radius(done, 10);
  CHECK(apply_solution_fade(base, done, 8) == base);

  CHECK_THROWS_AS(apply_solution_fade(base, make_state(g, player, goal), 8),
                  std::invalid_argument);
}

TEST_CASE("action one-hot encoding") {
  CHECK(encode_action(Action::Up) == std::array<float, 4>{1, 0, 0, 0});
  CHECK(encode_action(Action::Right) == std::array<float, 4>{0, 0, 0, 1});
  for (Action a : kAllActions) CHECK(decode_action(encode_action(a)) == a);
}
