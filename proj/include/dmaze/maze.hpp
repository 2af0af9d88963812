#pragma once
// Deep Maze engine: grid generation, transition function, reward, terminal
// detection and the BFS shortest-path oracle.

#include <array>
#include <compare>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace dmaze {

inline constexpr int kMinMazeSize = 2;
inline constexpr int kMaxMazeSize = 56;

enum class MazeStyle : std::uint8_t { Open, Perfect };

std::string_view to_string(MazeStyle style);
MazeStyle parse_maze_style(std::string_view text);

struct Cell {
  int x = 0;  // column
  int y = 0;  // row, 0 at the top
  friend auto operator<=>(const Cell&, const Cell&) = default;
};

// Stable wire encoding 0..3.
enum class Action : std::uint8_t { Up = 0, Down = 1, Left = 2, Right = 3 };

inline constexpr int kNumActions = 4;
inline constexpr std::array<Action, kNumActions> kAllActions = {
    Action::Up, Action::Down, Action::Left, Action::Right};

inline int action_index(Action a) { return static_cast<int>(a); }
Action action_from_index(int index);
std::string_view to_string(Action a);
Action parse_action(std::string_view text);
Cell move(Cell c, Action a);

class MazeGrid {
 public:
  // walls holds one flag per cell in row-major order (1 = wall).
  MazeGrid(int width, int height, std::uint64_t seed, MazeStyle style,
           std::vector<std::uint8_t> walls);

  int width() const { return width_; }
  int height() const { return height_; }
  std::uint64_t seed() const { return seed_; }
  MazeStyle style() const { return style_; }
  std::size_t cell_count() const { return walls_.size(); }

  bool in_bounds(Cell c) const {
    return c.x >= 0 && c.y >= 0 && c.x < width_ && c.y < height_;
  }
  bool is_wall(Cell c) const { return walls_[index(c)] != 0; }
  bool is_open(Cell c) const { return in_bounds(c) && !is_wall(c); }

  std::size_t index(Cell c) const {
    return static_cast<std::size_t>(c.y) * static_cast<std::size_t>(width_) +
           static_cast<std::size_t>(c.x);
  }
  Cell cell_at(std::size_t idx) const {
    return Cell{static_cast<int>(idx % static_cast<std::size_t>(width_)),
                static_cast<int>(idx / static_cast<std::size_t>(width_))};
  }

  std::span<const std::uint8_t> walls() const { return walls_; }
  std::vector<Cell> open_cells() const;  // row-major order
  std::size_t wall_count() const;

  friend bool operator==(const MazeGrid&, const MazeGrid&) = default;

 private:
  int width_;
  int height_;
  std::uint64_t seed_;
  MazeStyle style_;
  std::vector<std::uint8_t> walls_;
};

// Open style: no walls. Perfect style: randomized depth-first carving on the
// even-coordinate lattice, so open cells form a tree. For even dimensions the
// spare last column/row gets dead-end stubs off each lattice cell.
MazeGrid generate_maze(int width, int height, std::uint64_t seed,
                       MazeStyle style);

enum class ScenarioMode : std::uint8_t {
  Normal,
  Pomdp,
  LimitedPomdp,
  TimedLimitedPomdp
};
enum class VisionKind : std::uint8_t { Radius, Raytrace };
enum class Representation : std::uint8_t { Raw, Grayscale, Rgb };
enum class GoalPlacement : std::uint8_t { Corner, Random };
enum class StartRegion : std::uint8_t {
  All,
  LeftHalf,
  RightHalf,
  TopHalf,
  BottomHalf
};

std::string_view to_string(ScenarioMode v);
std::string_view to_string(VisionKind v);
std::string_view to_string(Representation v);
std::string_view to_string(GoalPlacement v);
std::string_view to_string(StartRegion v);
ScenarioMode parse_scenario_mode(std::string_view text);
VisionKind parse_vision_kind(std::string_view text);
Representation parse_representation(std::string_view text);
GoalPlacement parse_goal_placement(std::string_view text);
StartRegion parse_start_region(std::string_view text);

struct RewardScheme {
  double goal_reward = 1.0;
  double step_penalty = -0.01;
  double wall_penalty = 0.0;  // added on top of step_penalty on a bump
  friend bool operator==(const RewardScheme&, const RewardScheme&) = default;
};

struct ScenarioConfig {
  ScenarioMode mode = ScenarioMode::Normal;
  std::optional<int> vision_radius;
  VisionKind vision_kind = VisionKind::Radius;
  std::optional<int> time_limit;
  std::optional<int> solution_fade_steps;
  Representation representation = Representation::Raw;
  GoalPlacement goal_placement = GoalPlacement::Corner;
  RewardScheme reward;

  // Throws std::invalid_argument when a mode's required fields are missing
  // or a Normal scenario carries vision settings.
  void validate() const;
  bool partially_observable() const { return mode != ScenarioMode::Normal; }
  bool has_solution_overlay() const {
    return mode == ScenarioMode::TimedLimitedPomdp;
  }

  friend bool operator==(const ScenarioConfig&,
                         const ScenarioConfig&) = default;
};

struct MazeState {
  std::shared_ptr<const MazeGrid> grid;
  std::shared_ptr<const ScenarioConfig> scenario;
  Cell player;
  Cell goal;
  int step_count = 0;

  std::optional<int> time_limit() const { return scenario->time_limit; }
};

bool reached_goal(const MazeState& s);
bool is_terminal(const MazeState& s);

// Goal per the scenario's placement rule, player uniform over the open cells
// of `region` other than the goal. Deterministic in seed.
MazeState reset(std::shared_ptr<const MazeGrid> grid,
                std::shared_ptr<const ScenarioConfig> scenario,
                std::uint64_t seed, StartRegion region = StartRegion::All);

// Goal cell used by GoalPlacement::Corner: the open cell with the largest
// x + y (ties: larger y).
Cell corner_goal(const MazeGrid& grid);

bool in_start_region(const MazeGrid& grid, Cell c, StartRegion region);

struct StepResult {
  MazeState state;
  double reward = 0.0;
  bool terminal = false;
};

// Moves the player one cell if the target is open, else stays; the clock
// advances either way. Throws std::logic_error on a terminal state.
StepResult step(const MazeState& state, Action action);

// BFS distance from `from` to every cell, -1 for walls and unreachable cells.
std::vector<int> bfs_distances(const MazeGrid& grid, Cell from);

// Shortest path inclusive of both endpoints, empty when unreachable.
// Neighbours expand in Up, Down, Left, Right order. Throws
// std::invalid_argument when an endpoint is a wall or out of bounds.
std::vector<Cell> optimal_path(const MazeGrid& grid, Cell from, Cell to);

// Number of moves on the shortest path, -1 when unreachable.
int optimal_moves(const MazeGrid& grid, Cell from, Cell to);

}  // namespace dmaze
