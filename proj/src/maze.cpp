#include "dmaze/maze.hpp"

#include <algorithm>
#include <deque>
#include <stdexcept>
#include <string>
#include <utility>

#include "dmaze/rng.hpp"

namespace dmaze {
namespace {

template <typename E, std::size_t N>
E parse_enum(std::string_view text,
             const std::array<std::pair<std::string_view, E>, N>& names,
             std::string_view what) {
  for (const auto& [name, value] : names)
    if (name == text) return value;
  throw std::invalid_argument("unknown " + std::string(what) + ": '" +
                              std::string(text) + "'");
}

template <typename E, std::size_t N>
std::string_view enum_name(
    E value, const std::array<std::pair<std::string_view, E>, N>& names) {
  for (const auto& [name, v] : names)
    if (v == value) return name;
  return "?";
}

constexpr std::array<std::pair<std::string_view, MazeStyle>, 2> kStyleNames{
    {{"open", MazeStyle::Open}, {"perfect", MazeStyle::Perfect}}};
constexpr std::array<std::pair<std::string_view, Action>, 4> kActionNames{
    {{"up", Action::Up},
     {"down", Action::Down},
     {"left", Action::Left},
     {"right", Action::Right}}};
constexpr std::array<std::pair<std::string_view, ScenarioMode>, 4> kModeNames{
    {{"normal", ScenarioMode::Normal},
     {"pomdp", ScenarioMode::Pomdp},
     {"limited-pomdp", ScenarioMode::LimitedPomdp},
     {"timed-limited-pomdp", ScenarioMode::TimedLimitedPomdp}}};
constexpr std::array<std::pair<std::string_view, VisionKind>, 2> kVisionNames{
    {{"radius", VisionKind::Radius}, {"raytrace", VisionKind::Raytrace}}};
constexpr std::array<std::pair<std::string_view, Representation>, 3>
    kRepresentationNames{{{"raw", Representation::Raw},
                          {"grayscale", Representation::Grayscale},
                          {"rgb", Representation::Rgb}}};
constexpr std::array<std::pair<std::string_view, GoalPlacement>, 2> kGoalNames{
    {{"corner", GoalPlacement::Corner}, {"random", GoalPlacement::Random}}};
constexpr std::array<std::pair<std::string_view, StartRegion>, 5> kRegionNames{
    {{"all", StartRegion::All},
     {"left-half", StartRegion::LeftHalf},
     {"right-half", StartRegion::RightHalf},
     {"top-half", StartRegion::TopHalf},
     {"bottom-half", StartRegion::BottomHalf}}};

void check_dimension(int value, const char* name) {
  if (value < kMinMazeSize || value > kMaxMazeSize)
    throw std::invalid_argument(std::string(name) + " " +
                                std::to_string(value) + " outside [" +
                                std::to_string(kMinMazeSize) + ", " +
                                std::to_string(kMaxMazeSize) + "]");
}

}  // namespace

std::string_view to_string(MazeStyle style) { return enum_name(style, kStyleNames); }
MazeStyle parse_maze_style(std::string_view text) {
  if (text == "perfect-maze") return MazeStyle::Perfect;
  return parse_enum(text, kStyleNames, "maze style");
}
std::string_view to_string(Action a) { return enum_name(a, kActionNames); }
Action parse_action(std::string_view text) {
  return parse_enum(text, kActionNames, "action");
}
std::string_view to_string(ScenarioMode v) { return enum_name(v, kModeNames); }
std::string_view to_string(VisionKind v) { return enum_name(v, kVisionNames); }
std::string_view to_string(Representation v) {
  return enum_name(v, kRepresentationNames);
}
std::string_view to_string(GoalPlacement v) { return enum_name(v, kGoalNames); }
std::string_view to_string(StartRegion v) { return enum_name(v, kRegionNames); }
ScenarioMode parse_scenario_mode(std::string_view text) {
  return parse_enum(text, kModeNames, "scenario mode");
}
VisionKind parse_vision_kind(std::string_view text) {
  return parse_enum(text, kVisionNames, "vision kind");
}
Representation parse_representation(std::string_view text) {
  return parse_enum(text, kRepresentationNames, "representation");
}
GoalPlacement parse_goal_placement(std::string_view text) {
  return parse_enum(text, kGoalNames, "goal placement");
}
StartRegion parse_start_region(std::string_view text) {
  return parse_enum(text, kRegionNames, "start region");
}

Action action_from_index(int index) {
  if (index < 0 || index >= kNumActions)
    throw std::out_of_range("action index " + std::to_string(index));
  return static_cast<Action>(index);
}

Cell move(Cell c, Action a) {
  switch (a) {
    case Action::Up: return {c.x, c.y - 1};
    case Action::Down: return {c.x, c.y + 1};
    case Action::Left: return {c.x - 1, c.y};
    case Action::Right: return {c.x + 1, c.y};
  }
  return c;
}

MazeGrid::MazeGrid(int width, int height, std::uint64_t seed, MazeStyle style,
                   std::vector<std::uint8_t> walls)
    : width_(width), height_(height), seed_(seed), style_(style),
      walls_(std::move(walls)) {
  check_dimension(width, "width");
  check_dimension(height, "height");
  if (walls_.size() != static_cast<std::size_t>(width) * height)
    throw std::invalid_argument("wall array size does not match dimensions");
  for (auto& w : walls_) w = w ? 1 : 0;
}

std::vector<Cell> MazeGrid::open_cells() const {
  std::vector<Cell> cells;
  for (std::size_t i = 0; i < walls_.size(); ++i)
    if (!walls_[i]) cells.push_back(cell_at(i));
  return cells;
}

std::size_t MazeGrid::wall_count() const {
  return static_cast<std::size_t>(std::count(walls_.begin(), walls_.end(), 1));
}

MazeGrid generate_maze(int width, int height, std::uint64_t seed,
                       MazeStyle style) {
  check_dimension(width, "width");
  check_dimension(height, "height");
  const std::size_t n = static_cast<std::size_t>(width) * height;
  if (style == MazeStyle::Open)
    return MazeGrid(width, height, seed, style, std::vector<std::uint8_t>(n, 0));

  std::vector<std::uint8_t> walls(n, 1);
  auto at = [&](int x, int y) -> std::uint8_t& {
    return walls[static_cast<std::size_t>(y) * width + x];
  };

  // Lattice cells sit on even coordinates.
  const int lw = (width + 1) / 2;
  const int lh = (height + 1) / 2;
  std::vector<std::uint8_t> visited(static_cast<std::size_t>(lw) * lh, 0);
  Rng rng(seed);

  struct Node {
    int cx, cy;
  };
  std::vector<Node> stack;
  const Node start{static_cast<int>(uniform_index(rng, lw)),
                   static_cast<int>(uniform_index(rng, lh))};
  stack.push_back(start);
  visited[static_cast<std::size_t>(start.cy) * lw + start.cx] = 1;
  at(2 * start.cx, 2 * start.cy) = 0;

  constexpr std::array<std::pair<int, int>, 4> kDirs{
      {{0, -1}, {0, 1}, {-1, 0}, {1, 0}}};
  while (!stack.empty()) {
    const Node cur = stack.back();
    std::array<Node, 4> options{};
    std::size_t count = 0;
    for (auto [dx, dy] : kDirs) {
      const int nx = cur.cx + dx;
      const int ny = cur.cy + dy;
      if (nx < 0 || ny < 0 || nx >= lw || ny >= lh) continue;
      if (visited[static_cast<std::size_t>(ny) * lw + nx]) continue;
      options[count++] = {nx, ny};
    }
    if (count == 0) {
      stack.pop_back();
      continue;
    }
    const Node next = options[uniform_index(rng, count)];
    visited[static_cast<std::size_t>(next.cy) * lw + next.cx] = 1;
    at(cur.cx + next.cx, cur.cy + next.cy) = 0;  // passage between the two
    at(2 * next.cx, 2 * next.cy) = 0;
    stack.push_back(next);
  }

  // Even sizes leave a spare column/row; attach dead-end stubs so the open
  // cells still form a tree that reaches the border.
  if (width % 2 == 0)
    for (int y = 0; y < height; y += 2) at(width - 1, y) = 0;
  if (height % 2 == 0)
    for (int x = 0; x < width; x += 2) at(x, height - 1) = 0;

  return MazeGrid(width, height, seed, style, std::move(walls));
}

void ScenarioConfig::validate() const {
  if (mode == ScenarioMode::Normal) {
    if (vision_radius)
      throw std::invalid_argument("normal scenario must not set a vision radius");
  } else {
    if (!vision_radius)
      throw std::invalid_argument("partially observable scenario needs a vision radius");
  }
  if (vision_radius && *vision_radius < 1)
    throw std::invalid_argument("vision radius must be positive");
  if ((mode == ScenarioMode::LimitedPomdp ||
       mode == ScenarioMode::TimedLimitedPomdp) &&
      !time_limit)
    throw std::invalid_argument("limited scenarios need a time limit");
  if (time_limit && *time_limit < 1)
    throw std::invalid_argument("time limit must be positive");
  if (mode == ScenarioMode::TimedLimitedPomdp && !solution_fade_steps)
    throw std::invalid_argument("timed scenario needs solution fade steps");
  if (solution_fade_steps && *solution_fade_steps < 0)
    throw std::invalid_argument("solution fade steps must be non-negative");
}

bool reached_goal(const MazeState& s) { return s.player == s.goal; }

bool is_terminal(const MazeState& s) {
  if (reached_goal(s)) return true;
  const auto limit = s.time_limit();
  return limit && s.step_count >= *limit;
}

Cell corner_goal(const MazeGrid& grid) {
  Cell best{-1, -1};
  for (const Cell c : grid.open_cells()) {
    if (best.x < 0 || c.x + c.y > best.x + best.y ||
        (c.x + c.y == best.x + best.y && c.y > best.y))
      best = c;
  }
  if (best.x < 0) throw std::runtime_error("grid has no open cell");
  return best;
}

bool in_start_region(const MazeGrid& grid, Cell c, StartRegion region) {
  switch (region) {
    case StartRegion::All: return true;
    case StartRegion::LeftHalf: return c.x < (grid.width() + 1) / 2;
    case StartRegion::RightHalf: return c.x >= (grid.width() + 1) / 2;
    case StartRegion::TopHalf: return c.y < (grid.height() + 1) / 2;
    case StartRegion::BottomHalf: return c.y >= (grid.height() + 1) / 2;
  }
  return true;
}

MazeState reset(std::shared_ptr<const MazeGrid> grid,
                std::shared_ptr<const ScenarioConfig> scenario,
                std::uint64_t seed, StartRegion region) {
  if (!grid || !scenario) throw std::invalid_argument("reset needs a grid and scenario");
  scenario->validate();
  const std::vector<Cell> open = grid->open_cells();
  if (open.size() < 2)
    throw std::runtime_error("maze needs at least two open cells");

  Rng rng(seed);
  Cell goal = scenario->goal_placement == GoalPlacement::Corner
                  ? corner_goal(*grid)
                  : open[uniform_index(rng, open.size())];

  std::vector<Cell> starts;
  for (const Cell c : open)
    if (c != goal && in_start_region(*grid, c, region)) starts.push_back(c);
  if (starts.empty())
    throw std::runtime_error("no open start cell in region '" +
                             std::string(to_string(region)) + "'");
  const Cell player = starts[uniform_index(rng, starts.size())];
  return MazeState{std::move(grid), std::move(scenario), player, goal, 0};
}

StepResult step(const MazeState& state, Action action) {
  if (is_terminal(state)) throw std::logic_error("step() on a terminal state");
  StepResult out{state, 0.0, false};
  const Cell target = move(state.player, action);
  const bool blocked = !state.grid->is_open(target);
  if (!blocked) out.state.player = target;
  out.state.step_count = state.step_count + 1;

  const RewardScheme& rs = state.scenario->reward;
  if (reached_goal(out.state)) {
    out.reward = rs.goal_reward;
  } else {
    out.reward = rs.step_penalty + (blocked ? rs.wall_penalty : 0.0);
  }
  out.terminal = is_terminal(out.state);
  return out;
}

std::vector<int> bfs_distances(const MazeGrid& grid, Cell from) {
  std::vector<int> dist(grid.cell_count(), -1);
  if (!grid.is_open(from)) return dist;
  std::deque<Cell> queue{from};
  dist[grid.index(from)] = 0;
  while (!queue.empty()) {
    const Cell c = queue.front();
    queue.pop_front();
    for (const Action a : kAllActions) {
      const Cell n = move(c, a);
      if (!grid.is_open(n) || dist[grid.index(n)] >= 0) continue;
      dist[grid.index(n)] = dist[grid.index(c)] + 1;
      queue.push_back(n);
    }
  }
  return dist;
}

std::vector<Cell> optimal_path(const MazeGrid& grid, Cell from, Cell to) {
  if (!grid.is_open(from) || !grid.is_open(to))
    throw std::invalid_argument("optimal_path endpoints must be open cells");
  constexpr std::size_t kNone = static_cast<std::size_t>(-1);
  std::vector<std::size_t> parent(grid.cell_count(), kNone);
  std::vector<std::uint8_t> seen(grid.cell_count(), 0);
  std::deque<Cell> queue{from};
  seen[grid.index(from)] = 1;
  while (!queue.empty() && !seen[grid.index(to)]) {
    const Cell c = queue.front();
    queue.pop_front();
    for (const Action a : kAllActions) {
      const Cell n = move(c, a);
      if (!grid.is_open(n) || seen[grid.index(n)]) continue;
      seen[grid.index(n)] = 1;
      parent[grid.index(n)] = grid.index(c);
      queue.push_back(n);
    }
  }
  if (!seen[grid.index(to)]) return {};
  std::vector<Cell> path{to};
  for (std::size_t i = grid.index(to); i != grid.index(from);) {
    i = parent[i];
    path.push_back(grid.cell_at(i));
  }
  std::reverse(path.begin(), path.end());
  return path;
}

int optimal_moves(const MazeGrid& grid, Cell from, Cell to) {
  const auto path = optimal_path(grid, from, to);
  return path.empty() ? -1 : static_cast<int>(path.size()) - 1;
}

}  // namespace dmaze
