#include <CLI11.hpp>

#include <ostream>
#include <stdexcept>

#include "dmaze/formats.hpp"
#include "dmaze/harness.hpp"

namespace dmaze {
namespace fs = std::filesystem;

namespace {

// Raised for argument combinations CLI11 cannot check on its own.
struct UsageError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

constexpr const char* kFooter = R"(CSV schemas (RFC 4180, header row always present):
  dvae loss      epoch,loss,recon,kl
  agent metrics  episode,performance,rolling_mean
  horizon        horizon,mean_error
  summary        cell,label,seeds,avg_performance,converged_seeds,convergence_episode
  summary seeds  cell,seed_index,final_rolling_mean,convergence_episode
Environment: DREAMING_MAZE_SEED overrides the experiment master seed.
Exit codes: 0 success, 1 usage error, 2 runtime error.)";

const std::vector<std::string> kModes = {"normal", "pomdp", "limited-pomdp",
                                         "timed-limited-pomdp"};
const std::vector<std::string> kReps = {"raw", "grayscale", "rgb"};
const std::vector<std::string> kRegions = {"all", "left-half", "right-half", "top-half",
                                           "bottom-half"};

struct ScenarioFlags {
  std::string mode = "normal";
  std::optional<int> vision_radius;
  std::string vision_kind = "radius";
  std::optional<int> time_limit;
  std::optional<int> fade;
  std::string representation = "raw";
  std::string goal_placement = "corner";

  void add_to(CLI::App* app) {
    app->add_option("--mode", mode, "Scenario mode")
        ->check(CLI::IsMember(kModes))
        ->capture_default_str();
    app->add_option("--vision-radius", vision_radius, "Vision radius (partial modes)")
        ->check(CLI::NonNegativeNumber);
    app->add_option("--vision-kind", vision_kind, "radius | raytrace")
        ->check(CLI::IsMember({"radius", "raytrace"}))
        ->capture_default_str();
    app->add_option("--time-limit", time_limit, "Episode time limit")
        ->check(CLI::PositiveNumber);
    app->add_option("--fade", fade, "Solution overlay fade steps (timed mode)")
        ->check(CLI::PositiveNumber);
    app->add_option("--representation", representation, "raw | grayscale | rgb")
        ->check(CLI::IsMember(kReps))
        ->capture_default_str();
    app->add_option("--goal-placement", goal_placement, "corner | random")
        ->check(CLI::IsMember({"corner", "random"}))
        ->capture_default_str();
  }

  ScenarioConfig build() const {
    ScenarioConfig s;
    s.mode = parse_scenario_mode(mode);
    s.vision_radius = vision_radius;
    s.vision_kind = parse_vision_kind(vision_kind);
    s.time_limit = time_limit;
    s.solution_fade_steps = fade;
    s.representation = parse_representation(representation);
    s.goal_placement = parse_goal_placement(goal_placement);
    try {
      s.validate();
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }
    return s;
  }
};

struct AgentFlags {
  AgentHyper h;
  std::vector<int> hidden = h.hidden;

  void add_to(CLI::App* app) {
    app->add_option("--gamma", h.gamma, "Discount")->capture_default_str();
    app->add_option("--lr", h.lr, "Adam learning rate")->capture_default_str();
    app->add_option("--hidden", hidden, "Hidden widths")->delimiter(',')->capture_default_str();
    app->add_option("--batch-size", h.batch_size)->capture_default_str();
    app->add_option("--updates-per-episode", h.updates_per_episode)->capture_default_str();
    app->add_option("--epsilon-start", h.epsilon_start)->capture_default_str();
    app->add_option("--epsilon-end", h.epsilon_end)->capture_default_str();
    app->add_option("--epsilon-decay", h.epsilon_decay_steps)->capture_default_str();
    app->add_option("--target-sync", h.target_sync)->capture_default_str();
    app->add_option("--clip", h.clip)->capture_default_str();
    app->add_option("--gae-lambda", h.gae_lambda)->capture_default_str();
    app->add_option("--entropy-coef", h.entropy_coef)->capture_default_str();
    app->add_option("--ppo-epochs", h.ppo_epochs)->capture_default_str();
    app->add_option("--episodes-per-update", h.episodes_per_update)->capture_default_str();
    app->add_option("--old-policy-period", h.old_policy_period)->capture_default_str();
  }

  AgentHyper build() const {
    AgentHyper out = h;
    out.hidden = hidden;
    try {
      out.validate();
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }
    return out;
  }
};

fs::path sibling(const fs::path& p, const std::string& suffix) {
  return p.parent_path() / (p.stem().string() + suffix);
}

void print_report(std::ostream& out, const PerformanceReport& r) {
  out << "episodes " << r.per_episode.size() << "\n"
      << "final_rolling_mean " << format_number(r.final_rolling_mean()) << "\n"
      << "convergence_episode "
      << (r.convergence_episode ? std::to_string(*r.convergence_episode) : "none") << "\n";
}

CsvTable metrics_csv(const PerformanceReport& r) {
  CsvTable t{{"episode", "performance", "rolling_mean"}, {}};
  for (std::size_t i = 0; i < r.per_episode.size(); ++i)
    t.rows.push_back({std::to_string(i), format_number(r.per_episode[i]),
                      format_number(r.rolling_mean[i])});
  return t;
}

}  // namespace

int cli_dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Dreaming maze: a DVAE world model that dreams replay data for DQN and PPO.",
               "dreaming_maze"};
  app.footer(kFooter);
  app.require_subcommand(1, 1);

  // gen
  auto* gen = app.add_subcommand("gen", "Generate a maze grid (DMZ1)");
  int gen_w = 0, gen_h = 0;
  std::uint64_t gen_seed = 0;
  std::string gen_style = "perfect";
  std::string gen_out;
  gen->add_option("--width", gen_w, "Columns")->required()->check(CLI::Range(kMinMazeSize, kMaxMazeSize));
  gen->add_option("--height", gen_h, "Rows")->required()->check(CLI::Range(kMinMazeSize, kMaxMazeSize));
  gen->add_option("--seed", gen_seed, "Generator seed")->capture_default_str();
  gen->add_option("--style", gen_style, "open | perfect")
      ->check(CLI::IsMember({"open", "perfect"}))
      ->capture_default_str();
  gen->add_option("--out", gen_out, "Output .dmz path")->required();

  // collect
  auto* collect = app.add_subcommand("collect", "Collect random-policy experience D (DVRB)");
  std::string col_maze, col_out, col_region = "all", col_explore = "uniform";
  int col_episodes = 100;
  std::uint64_t col_seed = 0;
  std::size_t col_capacity = 1000000;
  ScenarioFlags col_scn;
  collect->add_option("--maze", col_maze, "Maze .dmz")->required()->check(CLI::ExistingFile);
  collect->add_option("--episodes", col_episodes)->check(CLI::PositiveNumber)->capture_default_str();
  collect->add_option("--seed", col_seed)->capture_default_str();
  collect->add_option("--start-region", col_region)->check(CLI::IsMember(kRegions))->capture_default_str();
  collect->add_option("--exploration", col_explore, "uniform | gaussian-logits")
      ->check(CLI::IsMember({"uniform", "gaussian-logits"}))
      ->capture_default_str();
  collect->add_option("--capacity", col_capacity)->check(CLI::PositiveNumber)->capture_default_str();
  collect->add_option("--out", col_out, "Output .dvrb")->required();
  col_scn.add_to(collect);

  // train-dvae
  auto* tdvae = app.add_subcommand("train-dvae", "Fit the DVAE transition model (DVM1 + loss CSV)");
  std::string td_replay, td_out, td_loss;
  DvaeHyper td;
  std::vector<int> td_hidden = td.hidden;
  tdvae->add_option("--replay", td_replay, "Real buffer .dvrb")->required()->check(CLI::ExistingFile);
  tdvae->add_option("--epochs", td.epochs)->check(CLI::NonNegativeNumber)->capture_default_str();
  tdvae->add_option("--lr", td.adam.lr)->check(CLI::PositiveNumber)->capture_default_str();
  tdvae->add_option("--kl-warmup", td.kl_warmup_epochs,
                    "Epochs over which the KL weight ramps linearly to its final value")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  tdvae->add_option("--kl-weight", td.kl_weight, "Final KL weight (1 = plain ELBO)")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  tdvae->add_option("--latent-dim", td.latent_dim)->check(CLI::PositiveNumber)->capture_default_str();
  tdvae->add_option("--hidden", td_hidden)->delimiter(',')->capture_default_str();
  tdvae->add_option("--batch-size", td.batch_size)->check(CLI::PositiveNumber)->capture_default_str();
  tdvae->add_option("--seed", td.seed)->capture_default_str();
  tdvae->add_option("--out", td_out, "Output .dvm")->required();
  tdvae->add_option("--loss-csv", td_loss, "Loss CSV (default <out>_loss.csv)");

  // dream
  auto* dream = app.add_subcommand("dream", "Generate the artificial buffer D-hat (DVRB)");
  std::string dr_model, dr_replay, dr_out, dr_eps = "zero";
  std::uint64_t dr_seed = 0;
  dream->add_option("--model", dr_model, "DVAE .dvm")->required()->check(CLI::ExistingFile);
  dream->add_option("--replay", dr_replay, "Real buffer .dvrb")->required()->check(CLI::ExistingFile);
  dream->add_option("--eps", dr_eps, "zero | sample")->check(CLI::IsMember({"zero", "sample"}))->capture_default_str();
  dream->add_option("--seed", dr_seed)->capture_default_str();
  dream->add_option("--out", dr_out, "Output .dvrb")->required();

  // train-agent
  auto* tagent = app.add_subcommand("train-agent", "Train DQN or PPO; scores one greedy episode per budget episode");
  std::string ta_agent, ta_maze, ta_replay, ta_out, ta_metrics;
  int ta_episodes = 1000;
  std::uint64_t ta_seed = 0;
  ScenarioFlags ta_scn;
  AgentFlags ta_hyper;
  tagent->add_option("--agent", ta_agent, "dqn | ppo")->required()->check(CLI::IsMember({"dqn", "ppo"}));
  tagent->add_option("--maze", ta_maze, "Maze .dmz")->required()->check(CLI::ExistingFile);
  tagent->add_option("--replay", ta_replay, "Buffer .dvrb (required for dqn; ppo without it trains on the environment)")
      ->check(CLI::ExistingFile);
  tagent->add_option("--episodes", ta_episodes)->check(CLI::NonNegativeNumber)->capture_default_str();
  tagent->add_option("--seed", ta_seed)->capture_default_str();
  tagent->add_option("--out", ta_out, "Output agent .dvm")->required();
  tagent->add_option("--metrics", ta_metrics, "Metrics CSV (default <out>_metrics.csv)");
  ta_scn.add_to(tagent);
  ta_hyper.add_to(tagent);

  // eval
  auto* eval = app.add_subcommand("eval", "Score a trained agent greedily");
  std::string ev_model, ev_maze, ev_metrics;
  int ev_episodes = 100;
  std::uint64_t ev_seed = 0;
  ScenarioFlags ev_scn;
  eval->add_option("--model", ev_model, "Agent .dvm")->required()->check(CLI::ExistingFile);
  eval->add_option("--maze", ev_maze, "Maze .dmz")->required()->check(CLI::ExistingFile);
  eval->add_option("--episodes", ev_episodes)->check(CLI::PositiveNumber)->capture_default_str();
  eval->add_option("--seed", ev_seed)->capture_default_str();
  eval->add_option("--metrics", ev_metrics, "Metrics CSV");
  ev_scn.add_to(eval);

  // render
  auto* render = app.add_subcommand("render", "Render an observation to PGM/PPM");
  std::string rd_maze, rd_replay, rd_compare, rd_out;
  std::uint64_t rd_seed = 0;
  std::size_t rd_index = 0;
  bool rd_next = false;
  std::optional<int> rd_channel;
  ScenarioFlags rd_scn;
  render->add_option("--maze", rd_maze, "Render the reset state of this maze")->check(CLI::ExistingFile);
  render->add_option("--seed", rd_seed, "Reset seed")->capture_default_str();
  render->add_option("--replay", rd_replay, "Render a record of this buffer")->check(CLI::ExistingFile);
  render->add_option("--compare", rd_compare, "Second buffer; its record is drawn to the right")
      ->check(CLI::ExistingFile);
  render->add_option("--index", rd_index, "Record index")->capture_default_str();
  render->add_flag("--next", rd_next, "Use the record's next state");
  render->add_option("--channel", rd_channel, "Render one channel as grayscale")->check(CLI::NonNegativeNumber);
  render->add_option("--out", rd_out, "Output .pgm/.ppm")->required();
  rd_scn.add_to(render);

  // experiment
  auto* experiment = app.add_subcommand("experiment", "Run the full pipeline and the Table-style summary");
  std::string ex_config, ex_out;
  std::vector<std::string> ex_sets;
  bool ex_quiet = false;
  experiment->add_option("--config", ex_config, "Config file (sectioned key = value)")->check(CLI::ExistingFile);
  experiment->add_option("--out", ex_out, "Output directory")->required();
  experiment->add_option("--set", ex_sets, "Override section.key=value (repeatable)");
  experiment->add_flag("--quiet", ex_quiet, "No progress lines");
  std::map<std::string, std::string> ex_flag_values;
  for (const std::string& key : config_keys())
    experiment->add_option("--" + key, ex_flag_values[key], "Config key " + key);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      app.exit(e, out, err);
      return 0;
    }
    err << "error: " << e.what() << "\n\n";
    const CLI::App* sub = app.get_subcommands().empty() ? &app : app.get_subcommands().front();
    err << sub->help();
    return 1;
  }

  try {
    if (gen->parsed()) {
      const MazeGrid grid = generate_maze(gen_w, gen_h, gen_seed, parse_maze_style(gen_style));
      save_dmz(gen_out, grid);
      return 0;
    }
    if (collect->parsed()) {
      ScenarioConfig scn = col_scn.build();
      const Environment env(load_dmz(col_maze), scn);
      ReplayBuffer d(col_capacity, BufferKind::Real);
      const RandomPolicy explorer(col_explore == "uniform" ? ExplorationKind::Uniform
                                                           : ExplorationKind::GaussianLogits);
      const RunStats stats =
          run_agent(env, as_act_fn(explorer), static_cast<std::size_t>(col_episodes), d,
                    RunOptions{col_seed, parse_start_region(col_region)});
      save_dvrb(col_out, d);
      out << "episodes " << stats.episodes << "\ntransitions " << stats.transitions
          << "\nstored " << d.size() << "\ngoals_reached " << stats.goals_reached << "\n";
      return 0;
    }
    if (tdvae->parsed()) {
      td.hidden = td_hidden;
      for (int h : td.hidden)
        if (h < 1) throw UsageError("--hidden widths must be positive");
      const ReplayBuffer d = load_dvrb(td_replay);
      CsvTable loss{{"epoch", "loss", "recon", "kl"}, {}};
      const DvaeTraining t = train_dvae(d, td, [&](const EpochStats& e) {
        loss.rows.push_back({std::to_string(e.epoch), format_number(e.loss),
                             format_number(e.recon), format_number(e.kl)});
      });
      save_dvm(td_out, dvae_model_file(t.params.nets));
      save_csv(td_loss.empty() ? sibling(td_out, "_loss.csv") : fs::path(td_loss), loss);
      if (!t.curve.empty()) out << "final_loss " << format_number(t.curve.back().loss) << "\n";
      return 0;
    }
    if (dream->parsed()) {
      DvaeParams params;
      params.nets = dvae_nets_from(load_dvm(dr_model));
      const ReplayBuffer d = load_dvrb(dr_replay);
      const ReplayBuffer dhat = generate_artificial_buffer(
          params, d, dr_eps == "zero" ? EpsMode::Zero : EpsMode::Sample, dr_seed);
      save_dvrb(dr_out, dhat);
      out << "records " << dhat.size() << "\n";
      return 0;
    }
    if (tagent->parsed()) {
      const AgentKind kind = parse_agent_kind(ta_agent);
      if (kind == AgentKind::Dqn && ta_replay.empty())
        throw UsageError("train-agent --agent dqn needs --replay");
      const Environment env(load_dmz(ta_maze), ta_scn.build());
      std::optional<ReplayBuffer> buffer;
      if (!ta_replay.empty()) buffer = load_dvrb(ta_replay);
      SessionOptions opts{ta_episodes, ta_seed, buffer ? &*buffer : nullptr};
      const SessionResult res = train_agent_session(kind, env, ta_hyper.build(), opts);
      save_dvm(ta_out, {kind == AgentKind::Dqn ? ModelRole::Dqn : ModelRole::Ppo, 0, res.nets});
      save_csv(ta_metrics.empty() ? sibling(ta_out, "_metrics.csv") : fs::path(ta_metrics),
               metrics_csv(res.report));
      print_report(out, res.report);
      return 0;
    }
    if (eval->parsed()) {
      const ModelFile m = load_dvm(ev_model);
      if (m.role == ModelRole::Dvae || m.nets.empty())
        throw UsageError("eval needs an agent model (role dqn or ppo)");
      const Environment env(load_dmz(ev_maze), ev_scn.build());
      const GreedyNetPolicy policy(m.nets.front());
      const PerformanceReport r = evaluate(env, policy, ev_episodes, ev_seed);
      if (!ev_metrics.empty()) save_csv(ev_metrics, metrics_csv(r));
      print_report(out, r);
      return 0;
    }
    if (render->parsed()) {
      if (rd_maze.empty() == rd_replay.empty())
        throw UsageError("render needs exactly one of --maze or --replay");
      const ScenarioConfig scn = rd_scn.build();
      auto draw = [&](const ObservationTensor& obs) {
        return rd_channel ? render_plane(obs, *rd_channel)
                          : render_observation(obs, scn.representation);
      };
      Image img;
      if (!rd_maze.empty()) {
        const Environment env(load_dmz(rd_maze), scn);
        img = draw(observe(env.reset(rd_seed)));
      } else {
        auto pick = [&](const std::string& path) {
          const ReplayBuffer b = load_dvrb(path);
          if (rd_index >= b.size()) throw UsageError("--index beyond the buffer");
          return rd_next ? b[rd_index].next_state : b[rd_index].state;
        };
        img = draw(pick(rd_replay));
        if (!rd_compare.empty()) img = side_by_side(img, draw(pick(rd_compare)));
      }
      save_pnm(rd_out, img);
      return 0;
    }
    if (experiment->parsed()) {
      ExperimentConfig cfg = ex_config.empty() ? ExperimentConfig{} : load_config(ex_config);
      apply_seed_override(cfg);
      try {
        for (const std::string& kv : ex_sets) {
          const auto eq = kv.find('=');
          if (eq == std::string::npos) throw UsageError("--set expects section.key=value");
          set_config_value(cfg, kv.substr(0, eq), kv.substr(eq + 1));
        }
        for (const std::string& key : config_keys())
          if (experiment->count("--" + key) > 0) set_config_value(cfg, key, ex_flag_values[key]);
        cfg.validate();
      } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
      }
      const ExperimentSummary s = run_experiment(cfg, ex_out, ex_quiet ? nullptr : &err);
      out << "cell,avg_performance,convergence_episode\n";
      for (const CellSummary& c : s.cells) {
        const auto conv = c.mean_convergence();
        out << cell_label(c.cell) << "," << format_number(c.avg_performance()) << ","
            << (conv ? format_number(*conv) : "none") << "\n";
      }
      return 0;
    }
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }
  return 1;
}

}  // namespace dmaze
