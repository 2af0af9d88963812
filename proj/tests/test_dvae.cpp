#include <doctest.h>

#include <cmath>

#include "dmaze/agents.hpp"
#include "dmaze/dvae.hpp"

using namespace dmaze;

namespace {

Environment open_env(int w, int h, std::optional<int> time_limit = {}) {
  ScenarioConfig sc;
  sc.time_limit = time_limit;
  return Environment(generate_maze(w, h, 0, MazeStyle::Open), sc);
}

// Follows the BFS shortest path.
Action oracle_act(const MazeState& s, const ObservationTensor&, Rng&) {
  const auto path = optimal_path(*s.grid, s.player, s.goal);
  const Cell next = path.at(1);
  for (Action a : kAllActions)
    if (move(s.player, a) == next) return a;
  throw std::logic_error("path step is not a move");
}

ObservationTensor tensor(std::initializer_list<float> values) {
  ObservationTensor t(1, 2, 2);
  t.values = values;
  return t;
}

Transition record(const ObservationTensor& s, Action a, float r,
                  const ObservationTensor& next, bool terminal) {
  return Transition{s, a, r, next, terminal};
}

// Clamped move without walls: the independent 2x2 open-maze oracle.
Cell oracle_move(Cell c, Action a, int w, int h) {
  Cell n = c;
  switch (a) {
    case Action::Up: n.y = std::max(0, c.y - 1); break;
    case Action::Down: n.y = std::min(h - 1, c.y + 1); break;
    case Action::Left: n.x = std::max(0, c.x - 1); break;
    case Action::Right: n.x = std::min(w - 1, c.x + 1); break;
  }
  return n;
}

struct Labeled {
  Cell from, to;
  Action action;
  ObservationTensor state, next;
};

// All 16 (player cell, action) pairs of the 2x2 open maze with the goal in
// the bottom-right corner. Pairs starting on the goal are built directly
// because the engine refuses to step out of a terminal state.
std::vector<Labeled> all_2x2_pairs(const Environment& env) {
  std::vector<Labeled> out;
  const Cell goal{1, 1};
  for (Cell c : env.grid->open_cells())
    for (Action a : kAllActions) {
      const Cell to = oracle_move(c, a, 2, 2);
      out.push_back({c, to, a, observe(MazeState{env.grid, env.scenario, c, goal, 0}),
                     observe(MazeState{env.grid, env.scenario, to, goal, 1})});
    }
  return out;
}

DvaeParams train_full_2x2(const Environment& env, int epochs) {
  ReplayBuffer d(64, BufferKind::Real);
  for (const auto& p : all_2x2_pairs(env))
    d.push(record(p.state, p.action, 0.0f, p.next, false));
  DvaeHyper h;
  h.epochs = epochs;
  h.seed = 3;
  h.batch_size = 16;
  h.kl_warmup_epochs = epochs / 5;
  return train_dvae(d, h).params;
}

}  // namespace

TEST_CASE("run_agent: optimal policy on the 2x2 open maze") {
  const Environment env = open_env(2, 2);
  ReplayBuffer d(100, BufferKind::Real);
  const RunStats st = run_agent(env, oracle_act, 1, d, RunOptions{});
  CHECK(st.episodes == 1);
  CHECK(d.size() >= 1);
  CHECK(d.size() <= 2);
  CHECK(d[d.size() - 1].terminal);
  for (std::size_t i = 0; i + 1 < d.size(); ++i) CHECK_FALSE(d[i].terminal);
  CHECK(st.goals_reached == 1);
}

TEST_CASE("run_agent: zero episodes leave the buffer unchanged") {
  const Environment env = open_env(3, 3);
  ReplayBuffer d(10, BufferKind::Real);
  run_agent(env, oracle_act, 2, d, RunOptions{});
  const ReplayBuffer before = d;
  run_agent(env, oracle_act, 0, d, RunOptions{});
  CHECK(d == before);
}

TEST_CASE("run_agent rejects a dreamed buffer") {
  ReplayBuffer d(10, BufferKind::Dreamed);
  CHECK_THROWS_AS(run_agent(open_env(2, 2), oracle_act, 1, d, RunOptions{}),
                  std::invalid_argument);
}

TEST_CASE("replay buffer keeps the newest records in FIFO order") {
  ReplayBuffer d(10, BufferKind::Real);
  for (int i = 0; i < 15; ++i)
    d.push(record(tensor({0, 0, 0, 0}), Action::Up, static_cast<float>(i),
                  tensor({0, 0, 0, 0}), false));
  REQUIRE(d.size() == 10);
  for (std::size_t i = 0; i < 10; ++i) CHECK(d[i].reward == static_cast<float>(i + 5));
  ObservationTensor wrong(2, 2, 2);
  CHECK_THROWS_AS(d.push(record(wrong, Action::Up, 0, wrong, false)), std::invalid_argument);
  CHECK_THROWS_AS(d.push(record(tensor({0, 0, 0, 0}), Action::Up, 0, wrong, false)),
                  std::invalid_argument);
}

TEST_CASE("run_agent: truncation is not terminal and episodes are seeded") {
  const Environment env = open_env(5, 5, 3);
  ReplayBuffer a(1000, BufferKind::Real), b(1000, BufferKind::Real);
  const RandomPolicy random;
  run_agent(env, as_act_fn(random), 20, a, RunOptions{7});
  run_agent(env, as_act_fn(random), 20, b, RunOptions{7});
  CHECK(a == b);
  const Cell goal{4, 4};
  for (const Transition& t : a)
    CHECK(t.terminal == (player_position(t.next_state, Representation::Raw) == goal));
}

TEST_CASE("run_agent: the start region restricts initial positions") {
  const Environment env = open_env(6, 4);
  ReplayBuffer d(100000, BufferKind::Real);
  RunOptions opt;
  opt.base_seed = 5;
  opt.start_region = StartRegion::LeftHalf;
  const RandomPolicy random;
  for (std::size_t ep = 0; ep < 50; ++ep) {
    ReplayBuffer one(1000, BufferKind::Real);
    opt.base_seed = ep;
    run_agent(env, as_act_fn(random), 1, one, opt);
    CHECK(player_position(one[0].state, Representation::Raw).x < 3);
  }
}

TEST_CASE("kl weight ramps linearly over the warm-up") {
  DvaeHyper h;
  h.kl_warmup_epochs = 4;
  CHECK(kl_weight_at(h, 0) == 0.0f);
  CHECK(kl_weight_at(h, 2) == 0.5f);
  CHECK(kl_weight_at(h, 4) == 1.0f);
  CHECK(kl_weight_at(h, 100) == 1.0f);
  h.kl_warmup_epochs = 0;
  CHECK(kl_weight_at(h, 0) == 1.0f);
}

TEST_CASE("kl weight ramps to its final value") {
  DvaeHyper h;
  h.kl_warmup_epochs = 4;
  h.kl_weight = 0.5f;
  CHECK(kl_weight_at(h, 0) == 0.0f);
  CHECK(kl_weight_at(h, 2) == 0.25f);
  CHECK(kl_weight_at(h, 4) == 0.5f);
  CHECK(kl_weight_at(h, 100) == 0.5f);
}

TEST_CASE("train_dvae: zero epochs return the initialization; seeds reproduce") {
  const Environment env = open_env(3, 3);
  ReplayBuffer d(1000, BufferKind::Real);
  run_agent(env, as_act_fn(RandomPolicy()), 5, d, RunOptions{2});
  DvaeHyper h;
  h.seed = 4;
  h.hidden = {16};
  h.latent_dim = 4;
  h.epochs = 0;
  const DvaeTraining none = train_dvae(d, h);
  CHECK(none.curve.empty());
  CHECK(none.params.nets == init_dvae(static_cast<int>(d.shape()->size()), h).nets);

  h.epochs = 5;
  const DvaeTraining a = train_dvae(d, h);
  const DvaeTraining b = train_dvae(d, h);
  REQUIRE(a.curve.size() == 5);
  for (std::size_t e = 0; e < 5; ++e) {
    CHECK(a.curve[e].epoch == static_cast<int>(e));
    CHECK(a.curve[e].loss == b.curve[e].loss);
    CHECK(a.curve[e].loss == doctest::Approx(a.curve[e].recon + a.curve[e].kl));
  }
  CHECK(a.params.nets == b.params.nets);
  h.seed = 5;
  CHECK_FALSE(train_dvae(d, h).params.nets == a.params.nets);

  CHECK_THROWS_AS(train_dvae(ReplayBuffer(4, BufferKind::Real), h), std::invalid_argument);
}

TEST_CASE("dream_step on an untrained model") {
  const Environment env = open_env(3, 3);
  DvaeHyper h;
  h.hidden = {8};
  h.latent_dim = 2;
  const DvaeParams p = init_dvae(27, h);
  const ObservationTensor s = observe(env.reset(1));
  const auto out = dream_step(p, s, Action::Right);
  CHECK(out.same_shape(s));
  for (float v : out.values) CHECK((v > 0.0f && v < 1.0f));
  CHECK(dream_step(p, s, Action::Right) == out);
  CHECK_THROWS_AS(dream_step(p, s, Action::Right, EpsMode::Sample), std::invalid_argument);
  Rng r1(3), r2(3);
  CHECK(dream_step(p, s, Action::Up, EpsMode::Sample, &r1) ==
        dream_step(p, s, Action::Up, EpsMode::Sample, &r2));
  CHECK_THROWS_AS(dream_step(p, ObservationTensor(3, 2, 2), Action::Up), std::invalid_argument);
}

TEST_CASE("dream_trajectory nests dream_step") {
  DvaeHyper h;
  h.hidden = {8};
  h.latent_dim = 2;
  const DvaeParams p = init_dvae(12, h);
  const ObservationTensor s0 = observe(open_env(2, 2).reset(0));
  const std::vector<Action> acts{Action::Right, Action::Down, Action::Left};
  const auto traj = dream_trajectory(p, s0, acts);
  REQUIRE(traj.size() == 3);
  CHECK(traj[0] == dream_step(p, s0, acts[0]));
  CHECK(traj[1] == dream_step(p, traj[0], acts[1]));
  CHECK(traj[2] == dream_step(p, traj[1], acts[2]));
  CHECK(dream_trajectory(p, s0, {Action::Up}).at(0) == dream_step(p, s0, Action::Up));
  CHECK_THROWS_AS(dream_trajectory(p, s0, {}), std::invalid_argument);
}

TEST_CASE("artificial buffer: one record per real record, chained within episodes") {
  DvaeHyper h;
  h.hidden = {8};
  h.latent_dim = 2;
  const DvaeParams p = init_dvae(4, h);
  const auto s0 = tensor({1, 0, 0, 0}), s1 = tensor({0, 1, 0, 0}),
             s2 = tensor({0, 0, 0, 1}), s3 = tensor({0, 0, 1, 0});

  SUBCASE("single record") {
    ReplayBuffer d(4, BufferKind::Real);
    d.push(record(s0, Action::Right, -0.01f, s1, false));
    const ReplayBuffer dh = generate_artificial_buffer(p, d);
    REQUIRE(dh.size() == 1);
    CHECK(dh.kind() == BufferKind::Dreamed);
    CHECK(dh[0].state == s0);
    CHECK(dh[0].next_state == dream_step(p, s0, Action::Right));
    CHECK(dh[0].action == Action::Right);
    CHECK(dh[0].reward == -0.01f);
    CHECK_FALSE(dh[0].terminal);
  }

  SUBCASE("two hand-built episodes") {
    // Episode 1: s0 -R-> s1 -D-> s2 (terminal). Episode 2: s3 -R-> s2.
    // A third record breaks continuity without a terminal.
    ReplayBuffer d(8, BufferKind::Real);
    d.push(record(s0, Action::Right, -0.01f, s1, false));
    d.push(record(s1, Action::Down, 1.0f, s2, true));
    d.push(record(s3, Action::Right, 1.0f, s2, true));
    d.push(record(s1, Action::Left, -0.01f, s0, false));
    d.push(record(s0, Action::Down, -0.01f, s3, false));
    const ReplayBuffer dh = generate_artificial_buffer(p, d);
    REQUIRE(dh.size() == d.size());
    CHECK(dh[0].state == s0);
    CHECK(dh[1].state == dh[0].next_state);  // chained
    CHECK(dh[2].state == s3);                // anchored after a terminal
    CHECK(dh[3].state == s1);                // anchored at a discontinuity
    CHECK(dh[4].state == dh[3].next_state);  // chained again
    for (std::size_t i = 0; i < d.size(); ++i) {
      CHECK(dh[i].action == d[i].action);
      CHECK(dh[i].reward == d[i].reward);
      CHECK(dh[i].terminal == d[i].terminal);
      CHECK(dh[i].next_state == dream_step(p, dh[i].state, d[i].action));
    }
  }

  CHECK_THROWS_AS(generate_artificial_buffer(p, ReplayBuffer(4, BufferKind::Real)),
                  std::invalid_argument);
}

TEST_CASE("artificial buffer size matches a collected buffer of 100") {
  const Environment env = open_env(4, 4, 10);
  ReplayBuffer d(100, BufferKind::Real);
  run_agent(env, as_act_fn(RandomPolicy()), 30, d, RunOptions{1});
  REQUIRE(d.size() == 100);
  DvaeHyper h;
  h.hidden = {8};
  h.latent_dim = 2;
  const ReplayBuffer dh = generate_artificial_buffer(init_dvae(48, h), d);
  CHECK(dh.size() == 100);
  for (std::size_t i = 0; i < d.size(); ++i) {
    CHECK(dh[i].action == d[i].action);
    CHECK(dh[i].reward == d[i].reward);
    CHECK(dh[i].terminal == d[i].terminal);
  }
}

TEST_CASE("enumerate_transitions covers every non-goal cell and action") {
  const Environment env = open_env(3, 3);
  const auto all = enumerate_transitions(env);
  CHECK(all.size() == 8 * 4);
  for (const auto& lt : all) {
    CHECK(player_position(lt.transition.state, Representation::Raw) == lt.from);
    CHECK(player_position(lt.transition.next_state, Representation::Raw) ==
          oracle_move(lt.from, lt.action, 3, 3));
  }
}

TEST_CASE("mean_abs_error") {
  CHECK(mean_abs_error(tensor({0, 1, 0, 1}), tensor({0, 1, 0, 1})) == 0.0);
  CHECK(mean_abs_error(tensor({0, 0, 0, 0}), tensor({1, 0, 0.5f, 0})) == doctest::Approx(0.375));
  CHECK_THROWS_AS(mean_abs_error(tensor({0, 0, 0, 0}), ObservationTensor(1, 1, 4)),
                  std::invalid_argument);
}

TEST_CASE("full-coverage 2x2 training reproduces the transition table") {
  const Environment env = open_env(2, 2);
  const DvaeParams p = train_full_2x2(env, 1000);
  const auto pairs = all_2x2_pairs(env);
  REQUIRE(pairs.size() == 16);
  for (const auto& pr : pairs) {
    const auto dreamed = dream_step(p, pr.state, pr.action);
    // Rounded player plane is exactly the one-hot of the true next cell.
    const auto plane = dreamed.plane(1);
    for (int y = 0; y < 2; ++y)
      for (int x = 0; x < 2; ++x) {
        const float want = (Cell{x, y} == pr.to) ? 1.0f : 0.0f;
        CHECK(std::round(plane[static_cast<std::size_t>(y * 2 + x)]) == want);
      }
  }
  // s0 = top-left; Right lands top-right.
  const auto s1 = dream_step(p, pairs[0].state, Action::Right);
  CHECK(player_position(s1, Representation::Raw) == Cell{1, 0});

  const auto err = horizon_errors(p, env, 8, 50, 1);
  CHECK(err.front() <= err.back());
}
