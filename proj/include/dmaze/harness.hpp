#pragma once
// Experiment configuration, metrics CSVs, the end-to-end experiment driver
// and the command-line front end.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "dmaze/agents.hpp"
#include "dmaze/dvae.hpp"
#include "dmaze/maze.hpp"

namespace dmaze {

// ---- CSV (RFC 4180) -------------------------------------------------------

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  // Index of a header column; throws std::invalid_argument when absent.
  std::size_t column(std::string_view name) const;
};

// Shortest decimal text that parses back to the same double.
std::string format_number(double v);
double parse_number(std::string_view text);

// Fields containing a comma, quote, CR or LF are quoted; lines end in CRLF.
std::string encode_csv(const CsvTable& table);
CsvTable decode_csv(std::string_view text);
void save_csv(const std::filesystem::path& path, const CsvTable& table);
CsvTable load_csv(const std::filesystem::path& path);

// ---- experiment configuration ---------------------------------------------

// The four buffer/learner pairings: DQN on D or D-hat, PPO on the real
// environment (D) or on D-hat.
enum class TableCell : std::uint8_t { DqnD, DqnDhat, PpoD, PpoDhat };
std::string_view to_string(TableCell cell);   // "dqn-d", "dqn-dhat", ...
std::string_view cell_label(TableCell cell);  // "DQN-D", "DQN-D̂", ...
TableCell parse_cell(std::string_view text);
AgentKind cell_agent(TableCell cell);
bool cell_uses_dream(TableCell cell);

struct ExperimentConfig {
  std::uint64_t master_seed = 0;

  int maze_width = 11;
  int maze_height = 11;
  // Absent: derived from the master seed.
  std::optional<std::uint64_t> maze_seed;
  MazeStyle maze_style = MazeStyle::Perfect;

  // Scenario the agents are trained and scored in.
  ScenarioConfig scenario;

  // Experience collection for D. The time limit replaces the scenario's
  // while collecting; absent keeps the scenario's.
  int collect_episodes = 150;
  std::optional<int> collect_time_limit = 50;
  StartRegion start_region = StartRegion::All;
  ExplorationKind exploration = ExplorationKind::Uniform;
  std::size_t buffer_capacity = 100000;

  DvaeHyper dvae;
  EpsMode dream_eps = EpsMode::Zero;

  AgentHyper agent;
  int agent_episodes = 10000;
  int agent_seeds = 3;
  std::vector<TableCell> cells = {TableCell::DqnD, TableCell::DqnDhat, TableCell::PpoD, TableCell::PpoDhat};

  int horizon = 12;
  int horizon_trials = 200;
  int frame_pairs = 8;

  // Throws std::invalid_argument naming the offending key.
  void validate() const;
  std::uint64_t effective_maze_seed() const;
};

// Every settable key as "section.key", in file order.
std::vector<std::string> config_keys();
// Sets one key from text; throws std::invalid_argument for an unknown key or
// a malformed value.
void set_config_value(ExperimentConfig& config, std::string_view key,
                      std::string_view value);
std::string get_config_value(const ExperimentConfig& config, std::string_view key);

// Sectioned key=value text: "[section]" lines, then "key = value" lines.
// '#' starts a comment that runs to the end of the line. Serialization lists every key.
std::string encode_config(const ExperimentConfig& config);
ExperimentConfig decode_config(std::string_view text);
ExperimentConfig load_config(const std::filesystem::path& path);

// DREAMING_MAZE_SEED, when set, replaces the master seed.
void apply_seed_override(ExperimentConfig& config);

// ---- experiment driver ----------------------------------------------------

struct CellSummary {
  TableCell cell;
  std::vector<double> final_rolling_means;             // one per seed
  std::vector<std::optional<int>> convergence_episodes;  // one per seed
  double avg_performance() const;
  // Mean over converged seeds; absent when none converged.
  std::optional<double> mean_convergence() const;
};

struct ExperimentSummary {
  std::vector<CellSummary> cells;
  const CellSummary* find(TableCell cell) const;
};

// Writes into out_dir:
//   config.ini, maze.dmz, d.dvrb, dhat.dvrb, dvae.dvm
//   dvae_loss.csv       epoch,loss,recon,kl
//   horizon.csv         horizon,mean_error
//   frames/pair_NNN.pgm|ppm  real next state | dreamed next state
//   cells/<cell>/seed_<k>/metrics.csv  episode,performance,rolling_mean
//   cells/<cell>/seed_<k>/agent.dvm
//   summary.csv         cell,label,seeds,avg_performance,converged_seeds,
//                       convergence_episode
//   summary_seeds.csv   cell,seed_index,final_rolling_mean,convergence_episode
// The summaries are recomputed from the stored metrics files.
ExperimentSummary run_experiment(const ExperimentConfig& config,
                                 const std::filesystem::path& out_dir,
                                 std::ostream* log = nullptr);

// Recomputes the summary from the metrics files under out_dir.
ExperimentSummary summarize_experiment_dir(const ExperimentConfig& config,
                                           const std::filesystem::path& out_dir);

// ---- command line ---------------------------------------------------------

// Exit codes: 0 success, 1 usage error (message and usage on `err`),
// 2 runtime error.
int cli_dispatch(int argc, const char* const* argv, std::ostream& out,
                 std::ostream& err);

}  // namespace dmaze
