#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <random>
#include <sstream>

#include "dmaze/formats.hpp"
#include "dmaze/harness.hpp"

using namespace dmaze;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("dmaze_harness_" + std::to_string(std::random_device{}()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

struct CliRun {
  int code;
  std::string out;
  std::string err;
};

CliRun cli(std::vector<std::string> args) {
  args.insert(args.begin(), "dreaming_maze");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli_dispatch(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  const Bytes b = read_file(p);
  return {b.begin(), b.end()};
}

ExperimentConfig tiny_config() {
  ExperimentConfig c;
  c.master_seed = 5;
  c.maze_width = 3;
  c.maze_height = 3;
  c.maze_style = MazeStyle::Open;
  c.scenario.time_limit = 12;
  c.collect_episodes = 10;
  c.collect_time_limit = 6;
  c.dvae.epochs = 7;
  c.dvae.hidden = {8};
  c.dvae.latent_dim = 2;
  c.dvae.kl_warmup_epochs = 3;
  c.agent.hidden = {8};
  c.agent_episodes = 12;
  c.agent_seeds = 2;
  c.horizon = 3;
  c.horizon_trials = 4;
  c.frame_pairs = 2;
  return c;
}

// Scoped environment variable.
struct EnvVar {
  std::string name;
  EnvVar(std::string n, const std::string& value) : name(std::move(n)) {
    ::setenv(name.c_str(), value.c_str(), 1);
  }
  ~EnvVar() { ::unsetenv(name.c_str()); }
};

}  // namespace

TEST_CASE("csv round trip with quoting and CRLF") {
  CsvTable t;
  t.header = {"a", "b,c", "d"};
  t.rows = {{"1", "x\"y", "line\nbreak"}, {"", "2.5", "z"}};
  const std::string text = encode_csv(t);
  CHECK(text.substr(0, 12) == "a,\"b,c\",d\r\n1");
  CHECK(text.find("\"x\"\"y\"") != std::string::npos);
  const CsvTable back = decode_csv(text);
  CHECK(back.header == t.header);
  CHECK(back.rows == t.rows);
  CHECK(back.column("d") == 2);
  CHECK_THROWS_AS(back.column("missing"), std::invalid_argument);
  CHECK_THROWS_AS(decode_csv("a,b\r\n1\r\n"), std::invalid_argument);
  CHECK_THROWS_AS(decode_csv("a\r\n\"open\r\n"), std::invalid_argument);
}

TEST_CASE("numbers format to the shortest round-tripping text") {
  Rng rng(6);
  std::normal_distribution<double> normal(0.0, 1e3);
  for (int i = 0; i < 1000; ++i) {
    const double v = normal(rng);
    CHECK(parse_number(format_number(v)) == v);
  }
  CHECK(format_number(0.5) == "0.5");
  CHECK(format_number(3.0) == "3");
  CHECK_THROWS_AS(parse_number("1.5x"), std::invalid_argument);
}

TEST_CASE("config serialization round trips every key") {
  ExperimentConfig c = tiny_config();
  c.maze_seed = 99;
  c.scenario.mode = ScenarioMode::TimedLimitedPomdp;
  c.scenario.vision_radius = 2;
  c.scenario.solution_fade_steps = 5;
  c.scenario.vision_kind = VisionKind::Raytrace;
  c.start_region = StartRegion::LeftHalf;
  c.exploration = ExplorationKind::GaussianLogits;
  c.dream_eps = EpsMode::Sample;
  c.cells = {TableCell::PpoDhat, TableCell::DqnD};
  c.agent.gamma = 0.9;
  const std::string text = encode_config(c);
  const ExperimentConfig back = decode_config(text);
  CHECK(encode_config(back) == text);
  for (const auto& key : config_keys())
    CHECK(get_config_value(back, key) == get_config_value(c, key));
  CHECK(back.cells == c.cells);
  CHECK(back.scenario == c.scenario);
}

TEST_CASE("config keys reject bad input") {
  ExperimentConfig c;
  CHECK_THROWS_AS(set_config_value(c, "maze.colour", "red"), std::invalid_argument);
  CHECK_THROWS_AS(set_config_value(c, "maze.width", "wide"), std::invalid_argument);
  CHECK_THROWS_AS(set_config_value(c, "run.cells", "dqn-x"), std::invalid_argument);
  set_config_value(c, "maze.seed", "auto");
  CHECK_FALSE(c.maze_seed.has_value());
  set_config_value(c, "dvae.kl_weight", "0");
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  set_config_value(c, "dvae.kl_weight", "0.5");
  CHECK_NOTHROW(c.validate());
  set_config_value(c, "maze.width", "99");
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  CHECK_THROWS_AS(decode_config("[maze]\nwidth 8\n"), std::invalid_argument);
  CHECK_THROWS_AS(decode_config("width = 8\n"), std::invalid_argument);
  const ExperimentConfig parsed = decode_config("# comment\n[maze]\nwidth = 8  # trailing\n\n[run]\nseeds = 2\n");
  CHECK(parsed.maze_width == 8);
  CHECK(parsed.agent_seeds == 2);
}

TEST_CASE("the seed environment variable overrides the master seed") {
  ExperimentConfig c;
  c.master_seed = 1;
  {
    EnvVar seed("DREAMING_MAZE_SEED", "77");
    apply_seed_override(c);
    CHECK(c.master_seed == 77);
  }
  apply_seed_override(c);
  CHECK(c.master_seed == 77);
  EnvVar bad("DREAMING_MAZE_SEED", "seven");
  CHECK_THROWS_AS(apply_seed_override(c), std::invalid_argument);
}

TEST_CASE("table cells") {
  CHECK(to_string(TableCell::DqnDhat) == "dqn-dhat");
  CHECK(cell_label(TableCell::PpoD) == "PPO-D");
  CHECK(parse_cell("ppo-dhat") == TableCell::PpoDhat);
  CHECK(cell_agent(TableCell::DqnD) == AgentKind::Dqn);
  CHECK(cell_uses_dream(TableCell::PpoDhat));
  CHECK_FALSE(cell_uses_dream(TableCell::PpoD));
}

TEST_CASE("cli: gen writes a DMZ1 file; out-of-range width is a usage error") {
  TempDir dir;
  const auto path = (dir.path / "m.dmz").string();
  const auto ok = cli({"gen", "--width", "8", "--height", "8", "--seed", "42", "--style", "perfect", "--out", path});
  CHECK(ok.code == 0);
  CHECK(load_dmz(path) == generate_maze(8, 8, 42, MazeStyle::Perfect));

  const auto bad = cli({"gen", "--width", "99", "--height", "8", "--out", path});
  CHECK(bad.code == 1);
  CHECK(bad.err.find("gen") != std::string::npos);
  CHECK(cli({"frobnicate"}).code == 1);
  CHECK(cli({"gen", "--width", "8", "--height", "8", "--out", path, "--bogus"}).code == 1);
  CHECK(cli({}).code == 1);
  const auto help = cli({"--help"});
  CHECK(help.code == 0);
  CHECK(help.out.find("epoch,loss,recon,kl") != std::string::npos);
}

TEST_CASE("cli: collect, train-dvae, dream, train-agent, eval and render") {
  TempDir dir;
  auto p = [&](const char* name) { return (dir.path / name).string(); };
  REQUIRE(cli({"gen", "--width", "3", "--height", "3", "--style", "open", "--out", p("m.dmz")}).code == 0);
  REQUIRE(cli({"collect", "--maze", p("m.dmz"), "--episodes", "5", "--time-limit", "5", "--out", p("d.dvrb")}).code == 0);
  const auto td = cli({"train-dvae", "--replay", p("d.dvrb"), "--epochs", "4", "--lr", "1e-3", "--seed", "1",
                       "--hidden", "8", "--latent-dim", "2", "--out", p("model.dvm")});
  REQUIRE(td.code == 0);
  const CsvTable loss = load_csv(p("model_loss.csv"));
  CHECK(loss.header == std::vector<std::string>{"epoch", "loss", "recon", "kl"});
  CHECK(loss.rows.size() == 4);
  CHECK(load_dvm(p("model.dvm")).role == ModelRole::Dvae);

  REQUIRE(cli({"dream", "--model", p("model.dvm"), "--replay", p("d.dvrb"), "--out", p("dh.dvrb")}).code == 0);
  CHECK(load_dvrb(p("dh.dvrb")).size() == load_dvrb(p("d.dvrb")).size());

  REQUIRE(cli({"train-agent", "--agent", "dqn", "--maze", p("m.dmz"), "--replay", p("dh.dvrb"), "--episodes", "5",
               "--time-limit", "8", "--hidden", "8", "--out", p("agent.dvm")}).code == 0);
  CHECK(load_csv(p("agent_metrics.csv")).rows.size() == 5);
  const auto ev = cli({"eval", "--model", p("agent.dvm"), "--maze", p("m.dmz"), "--episodes", "3", "--time-limit", "8"});
  CHECK(ev.code == 0);

  CHECK(cli({"render", "--replay", p("d.dvrb"), "--compare", p("dh.dvrb"), "--next", "--out", p("pair.ppm")}).code == 0);
  const Image pair = load_pnm(p("pair.ppm"));
  CHECK(pair.width == 6);
  CHECK(cli({"render", "--maze", p("m.dmz"), "--channel", "1", "--out", p("player.pgm")}).code == 0);
  CHECK(load_pnm(p("player.pgm")).channels == 1);

  // DQN without a buffer and a corrupt buffer are runtime errors.
  write_file(p("junk.dvrb"), std::string_view("DVRBjunk"));
  CHECK(cli({"train-dvae", "--replay", p("junk.dvrb"), "--out", p("x.dvm")}).code == 2);
  CHECK(cli({"train-agent", "--agent", "dqn", "--maze", p("m.dmz"), "--out", p("y.dvm")}).code != 0);
}

TEST_CASE("experiment pipeline: artifacts, summary recomputation and determinism") {
  TempDir dir;
  const ExperimentConfig c = tiny_config();
  const fs::path a = dir.path / "a", b = dir.path / "b";
  const ExperimentSummary summary = run_experiment(c, a);
  run_experiment(c, b);

  const CsvTable loss = load_csv(a / "dvae_loss.csv");
  CHECK(loss.rows.size() == static_cast<std::size_t>(c.dvae.epochs));
  for (const char* f : {"maze.dmz", "d.dvrb", "dhat.dvrb", "dvae.dvm", "horizon.csv", "config.ini",
                        "summary.csv", "summary_seeds.csv", "frames/pair_000.ppm"})
    CHECK(fs::exists(a / f));

  const CsvTable table = load_csv(a / "summary.csv");
  std::vector<std::string> labels;
  for (const auto& row : table.rows) labels.push_back(row[table.column("label")]);
  CHECK(labels == std::vector<std::string>{"DQN-D", "DQN-D̂", "PPO-D", "PPO-D̂"});

  // Summary values are recomputed from the per-episode metrics files.
  for (const CellSummary& cell : summary.cells) {
    REQUIRE(cell.final_rolling_means.size() == 2);
    for (std::size_t k = 0; k < 2; ++k) {
      const CsvTable m = load_csv(a / "cells" / std::string(to_string(cell.cell)) /
                                  ("seed_" + std::to_string(k)) / "metrics.csv");
      CHECK(m.rows.size() == static_cast<std::size_t>(c.agent_episodes));
      std::vector<double> perf;
      for (const auto& row : m.rows) perf.push_back(parse_number(row[m.column("performance")]));
      CHECK(summarize_performance(perf).final_rolling_mean() == cell.final_rolling_means[k]);
    }
  }
  const ExperimentSummary again = summarize_experiment_dir(c, a);
  REQUIRE(again.cells.size() == summary.cells.size());
  for (std::size_t i = 0; i < again.cells.size(); ++i)
    CHECK(again.cells[i].final_rolling_means == summary.cells[i].final_rolling_means);

  for (const auto& entry : fs::recursive_directory_iterator(a))
    if (entry.path().extension() == ".csv") {
      const fs::path twin = b / fs::relative(entry.path(), a);
      CHECK(slurp(entry.path()) == slurp(twin));
    }
  CHECK(decode_config(slurp(a / "config.ini")).master_seed == c.master_seed);
}

TEST_CASE("cli experiment: flags beat --set, --set beats the config file") {
  TempDir dir;
  ExperimentConfig c = tiny_config();
  c.cells = {TableCell::PpoD};
  c.agent_seeds = 1;
  write_file(dir.path / "exp.ini", encode_config(c));
  const auto out = (dir.path / "out").string();
  const auto run = cli({"experiment", "--config", (dir.path / "exp.ini").string(), "--out", out, "--quiet",
                        "--set", "run.episodes=9", "--set", "dvae.epochs=3", "--dvae.epochs", "2"});
  REQUIRE(run.code == 0);
  const ExperimentConfig used = decode_config(slurp(fs::path(out) / "config.ini"));
  CHECK(used.agent_episodes == 9);
  CHECK(used.dvae.epochs == 2);
  CHECK(load_csv(fs::path(out) / "dvae_loss.csv").rows.size() == 2);
  CHECK(cli({"experiment", "--out", out, "--set", "no.such=1"}).code == 1);
}
