#include <algorithm>
#include <stdexcept>

#include "dmaze/agents.hpp"

namespace dmaze {

double performance_ratio(int optimal_moves, int actual_moves, bool reached) {
  if (!reached || actual_moves <= 0) return 0.0;
  return std::clamp(static_cast<double>(optimal_moves) / actual_moves, 0.0, 1.0);
}

EpisodeOutcome run_episode(const Environment& env, const ActFn& policy,
                           const MazeState& start, Rng& rng) {
  const int cap = start.time_limit()
                      ? *start.time_limit()
                      : 4 * static_cast<int>(env.grid->cell_count());
  EpisodeOutcome out;
  out.optimal_moves = optimal_moves(*env.grid, start.player, start.goal);
  MazeState s = start;
  while (!is_terminal(s) && s.step_count < cap) {
    const Action a = policy(s, observe(s), rng);
    s = step(s, a).state;
  }
  out.reached_goal = reached_goal(s);
  out.moves = s.step_count - start.step_count;
  out.performance = performance_ratio(out.optimal_moves, out.moves, out.reached_goal);
  return out;
}

PerformanceReport summarize_performance(std::vector<double> per_episode,
                                        int window, double threshold) {
  if (window < 1) throw std::invalid_argument("rolling window must be >= 1");
  PerformanceReport r;
  r.window = window;
  r.threshold = threshold;
  r.per_episode = std::move(per_episode);
  r.rolling_mean.reserve(r.per_episode.size());
  double sum = 0.0;
  const std::size_t w = static_cast<std::size_t>(window);
  for (std::size_t i = 0; i < r.per_episode.size(); ++i) {
    sum += r.per_episode[i];
    if (i >= w) sum -= r.per_episode[i - w];
    const std::size_t n = std::min(i + 1, w);
    const double mean = sum / static_cast<double>(n);
    r.rolling_mean.push_back(mean);
    if (!r.convergence_episode && n == w && mean >= threshold)
      r.convergence_episode = static_cast<int>(i);
  }
  return r;
}

PerformanceReport evaluate(const Environment& env, const ActFn& policy,
                           int episodes, std::uint64_t seed) {
  std::vector<double> perf;
  perf.reserve(static_cast<std::size_t>(std::max(episodes, 0)));
  for (int i = 0; i < episodes; ++i) {
    const auto idx = static_cast<std::uint64_t>(i);
    Rng rng(derive_seed(seed, "eval-policy", idx));
    perf.push_back(
        run_episode(env, policy, env.reset(derive_seed(seed, "eval", idx)), rng)
            .performance);
  }
  return summarize_performance(std::move(perf));
}

PerformanceReport evaluate(const Environment& env, const Policy& policy,
                           int episodes, std::uint64_t seed) {
  return evaluate(env, as_act_fn(policy), episodes, seed);
}

SessionResult train_agent_session(AgentKind kind, const Environment& env,
                                  const AgentHyper& hyper,
                                  const SessionOptions& options,
                                  const EpisodeCallback& on_episode) {
  if (options.episodes < 0) throw std::invalid_argument("episodes must be >= 0");
  const TensorShape shape = env.observation_shape();
  if (options.buffer && !options.buffer->empty() && options.buffer->shape() != shape)
    throw std::invalid_argument("replay buffer shape does not match the environment");
  if (options.buffer && options.buffer->empty())
    throw std::invalid_argument("replay buffer is empty");
  if (kind == AgentKind::Dqn && !options.buffer)
    throw std::invalid_argument("dqn sessions need a replay buffer");

  const int obs_dim = static_cast<int>(shape.size());
  const std::uint64_t seed = options.seed;
  Rng train_rng(derive_seed(seed, "session-train"));
  Rng eval_rng(derive_seed(seed, "session-eval-policy"));
  std::vector<double> perf;
  perf.reserve(static_cast<std::size_t>(options.episodes));

  auto score = [&](const DenseNet<float>& net, int i) {
    const MazeState start =
        env.reset(derive_seed(seed, "session-eval", static_cast<std::uint64_t>(i)));
    const ActFn greedy = [&net](const MazeState&, const ObservationTensor& obs, Rng&) {
      return action_from_index(argmax4(net.forward(obs.values)));
    };
    const double p = run_episode(env, greedy, start, eval_rng).performance;
    perf.push_back(p);
    if (on_episode) on_episode(i, p);
  };

  if (kind == AgentKind::Dqn) {
    DqnLearner learner(obs_dim, hyper, seed);
    for (int i = 0; i < options.episodes; ++i) {
      for (int u = 0; u < hyper.updates_per_episode; ++u)
        learner.update(*options.buffer, train_rng);
      score(learner.online(), i);
    }
    return {summarize_performance(std::move(perf)), learner.online(),
            {learner.online(), learner.target()}};
  }

  PpoLearner learner(obs_dim, hyper, seed);
  for (int i = 0; i < options.episodes; ++i) {
    if (options.buffer) {
      for (int u = 0; u < hyper.updates_per_episode; ++u)
        learner.update_from_buffer(*options.buffer, train_rng);
    } else {
      learner.train_episode(
          env.reset(derive_seed(seed, "session-episode", static_cast<std::uint64_t>(i))),
          train_rng);
    }
    score(learner.policy_net(), i);
  }
  return {summarize_performance(std::move(perf)), learner.policy_net(),
          {learner.policy_net(), learner.value_net(), learner.critic_net()}};
}

}  // namespace dmaze
