#include <cstdio>
#include <numeric>
#include <ostream>
#include <stdexcept>

#include "dmaze/formats.hpp"
#include "dmaze/harness.hpp"

namespace dmaze {
namespace fs = std::filesystem;

namespace {

fs::path seed_dir(const fs::path& out_dir, TableCell cell, int k) {
  return out_dir / "cells" / std::string(to_string(cell)) / ("seed_" + std::to_string(k));
}

std::string convergence_text(const std::optional<int>& c) {
  return c ? std::to_string(*c) : std::string();
}

CsvTable metrics_table(const PerformanceReport& report) {
  CsvTable t{{"episode", "performance", "rolling_mean"}, {}};
  for (std::size_t i = 0; i < report.per_episode.size(); ++i)
    t.rows.push_back({std::to_string(i), format_number(report.per_episode[i]),
                      format_number(report.rolling_mean[i])});
  return t;
}

ModelFile agent_model_file(AgentKind kind, const std::vector<DenseNet<float>>& nets) {
  return {kind == AgentKind::Dqn ? ModelRole::Dqn : ModelRole::Ppo, 0, nets};
}

std::string frame_name(int i, const Image& img) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "pair_%03d.%s", i, img.channels == 1 ? "pgm" : "ppm");
  return buf;
}

}  // namespace

double CellSummary::avg_performance() const {
  if (final_rolling_means.empty()) return 0.0;
  return std::accumulate(final_rolling_means.begin(), final_rolling_means.end(), 0.0) /
         static_cast<double>(final_rolling_means.size());
}

std::optional<double> CellSummary::mean_convergence() const {
  double sum = 0.0;
  int n = 0;
  for (const auto& c : convergence_episodes)
    if (c) {
      sum += *c;
      ++n;
    }
  if (n == 0) return std::nullopt;
  return sum / n;
}

const CellSummary* ExperimentSummary::find(TableCell cell) const {
  for (const CellSummary& c : cells)
    if (c.cell == cell) return &c;
  return nullptr;
}

ExperimentSummary summarize_experiment_dir(const ExperimentConfig& config,
                                           const fs::path& out_dir) {
  ExperimentSummary summary;
  CsvTable per_seed{{"cell", "seed_index", "final_rolling_mean", "convergence_episode"}, {}};
  CsvTable cells{{"cell", "label", "seeds", "avg_performance", "converged_seeds",
                  "convergence_episode"},
                 {}};
  for (TableCell cell : config.cells) {
    CellSummary cs{cell, {}, {}};
    for (int k = 0; k < config.agent_seeds; ++k) {
      const CsvTable m = load_csv(seed_dir(out_dir, cell, k) / "metrics.csv");
      const std::size_t col = m.column("performance");
      std::vector<double> perf;
      perf.reserve(m.rows.size());
      for (const auto& row : m.rows) perf.push_back(parse_number(row[col]));
      const PerformanceReport r = summarize_performance(std::move(perf));
      cs.final_rolling_means.push_back(r.final_rolling_mean());
      cs.convergence_episodes.push_back(r.convergence_episode);
      per_seed.rows.push_back({std::string(to_string(cell)), std::to_string(k),
                               format_number(r.final_rolling_mean()),
                               convergence_text(r.convergence_episode)});
    }
    const auto conv = cs.mean_convergence();
    const auto converged = std::count_if(cs.convergence_episodes.begin(),
                                         cs.convergence_episodes.end(),
                                         [](const auto& c) { return c.has_value(); });
    cells.rows.push_back({std::string(to_string(cell)), std::string(cell_label(cell)),
                          std::to_string(config.agent_seeds),
                          format_number(cs.avg_performance()), std::to_string(converged),
                          conv ? format_number(*conv) : std::string()});
    summary.cells.push_back(std::move(cs));
  }
  save_csv(out_dir / "summary_seeds.csv", per_seed);
  save_csv(out_dir / "summary.csv", cells);
  return summary;
}

ExperimentSummary run_experiment(const ExperimentConfig& config, const fs::path& out_dir,
                                 std::ostream* log) {
  config.validate();
  auto note = [&](const std::string& msg) {
    if (log) *log << msg << std::endl;
  };
  fs::create_directories(out_dir);
  write_file(out_dir / "config.ini", encode_config(config));
  const std::uint64_t master = config.master_seed;

  MazeGrid grid = generate_maze(config.maze_width, config.maze_height,
                                config.effective_maze_seed(), config.maze_style);
  save_dmz(out_dir / "maze.dmz", grid);
  const Environment env(grid, config.scenario);
  ScenarioConfig collect_scenario = config.scenario;
  if (config.collect_time_limit) collect_scenario.time_limit = config.collect_time_limit;
  const Environment collect_env(grid, collect_scenario);

  ReplayBuffer d(config.buffer_capacity, BufferKind::Real);
  const RandomPolicy explorer(config.exploration);
  const RunStats stats = run_agent(
      collect_env, as_act_fn(explorer), static_cast<std::size_t>(config.collect_episodes), d,
      RunOptions{derive_seed(master, "collect"), config.start_region});
  save_dvrb(out_dir / "d.dvrb", d);
  note("collected " + std::to_string(stats.transitions) + " transitions in " +
       std::to_string(stats.episodes) + " episodes");

  DvaeHyper dh = config.dvae;
  dh.seed = derive_seed(master, "dvae");
  CsvTable loss{{"epoch", "loss", "recon", "kl"}, {}};
  const DvaeTraining training = train_dvae(d, dh, [&](const EpochStats& e) {
    loss.rows.push_back({std::to_string(e.epoch), format_number(e.loss),
                         format_number(e.recon), format_number(e.kl)});
    if (log && (e.epoch + 1) % 50 == 0)
      note("dvae epoch " + std::to_string(e.epoch + 1) + " loss " + format_number(e.loss));
  });
  save_csv(out_dir / "dvae_loss.csv", loss);
  save_dvm(out_dir / "dvae.dvm", dvae_model_file(training.params.nets));

  const ReplayBuffer dhat = generate_artificial_buffer(training.params, d, config.dream_eps,
                                                       derive_seed(master, "dream"));
  save_dvrb(out_dir / "dhat.dvrb", dhat);

  if (config.frame_pairs > 0) {
    fs::create_directories(out_dir / "frames");
    const std::size_t n = d.size();
    const std::size_t pairs = std::min<std::size_t>(static_cast<std::size_t>(config.frame_pairs), n);
    for (std::size_t i = 0; i < pairs; ++i) {
      const std::size_t idx = i * n / pairs;
      const Representation rep = config.scenario.representation;
      const Image img = side_by_side(render_observation(d[idx].next_state, rep),
                                     render_observation(dhat[idx].next_state, rep));
      save_pnm(out_dir / "frames" / frame_name(static_cast<int>(i), img), img);
    }
  }

  CsvTable horizon{{"horizon", "mean_error"}, {}};
  if (config.horizon > 0) {
    const auto errs = horizon_errors(training.params, env, config.horizon,
                                     config.horizon_trials, derive_seed(master, "horizon"));
    for (std::size_t k = 0; k < errs.size(); ++k)
      horizon.rows.push_back({std::to_string(k + 1), format_number(errs[k])});
  }
  save_csv(out_dir / "horizon.csv", horizon);

  for (TableCell cell : config.cells) {
    const AgentKind kind = cell_agent(cell);
    const ReplayBuffer* buffer = nullptr;
    if (cell == TableCell::DqnD) buffer = &d;
    if (cell_uses_dream(cell)) buffer = &dhat;
    for (int k = 0; k < config.agent_seeds; ++k) {
      const fs::path dir = seed_dir(out_dir, cell, k);
      fs::create_directories(dir);
      SessionOptions opts;
      opts.episodes = config.agent_episodes;
      opts.seed = derive_seed(master, "agent/" + std::string(to_string(cell)),
                              static_cast<std::uint64_t>(k));
      opts.buffer = buffer;
      const SessionResult res = train_agent_session(kind, env, config.agent, opts);
      save_csv(dir / "metrics.csv", metrics_table(res.report));
      save_dvm(dir / "agent.dvm", agent_model_file(kind, res.nets));
      note(std::string(cell_label(cell)) + " seed " + std::to_string(k) +
           " final rolling mean " + format_number(res.report.final_rolling_mean()));
    }
  }
  return summarize_experiment_dir(config, out_dir);
}

}  // namespace dmaze
