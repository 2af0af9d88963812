#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "dmaze/agents.hpp"

namespace dmaze {

ActFn as_act_fn(const Policy& policy) {
  return [&policy](const MazeState&, const ObservationTensor& obs, Rng& rng) {
    return policy.act(obs, rng);
  };
}

Action random_policy(const ObservationTensor&, Rng& rng) {
  return action_from_index(static_cast<int>(uniform_index(rng, kNumActions)));
}

Action RandomPolicy::act(const ObservationTensor& obs, Rng& rng) const {
  if (kind_ == ExplorationKind::Uniform) return random_policy(obs, rng);
  std::normal_distribution<double> normal(0.0, sigma_);
  std::array<float, kNumActions> logits{};
  for (float& l : logits) l = static_cast<float>(normal(rng));
  return action_from_index(argmax4(logits));
}

int argmax4(std::span<const float> v) {
  if (v.size() != kNumActions) throw std::invalid_argument("argmax4: need 4 values");
  int best = 0;
  for (int i = 1; i < kNumActions; ++i)
    if (v[static_cast<std::size_t>(i)] > v[static_cast<std::size_t>(best)]) best = i;
  return best;
}

Action GreedyNetPolicy::act(const ObservationTensor& obs, Rng&) const {
  return action_from_index(argmax4(net_.forward(obs.values)));
}

std::array<double, kNumActions> softmax4(std::span<const float> logits) {
  if (logits.size() != kNumActions) throw std::invalid_argument("softmax4: need 4 logits");
  const float mx = *std::max_element(logits.begin(), logits.end());
  std::array<double, kNumActions> p{};
  double sum = 0.0;
  for (std::size_t i = 0; i < kNumActions; ++i) {
    p[i] = std::exp(static_cast<double>(logits[i]) - mx);
    sum += p[i];
  }
  for (double& x : p) x /= sum;
  return p;
}

double epsilon_at(const AgentHyper& hyper, std::int64_t step) {
  if (hyper.epsilon_decay_steps <= 0 || step >= hyper.epsilon_decay_steps)
    return hyper.epsilon_end;
  const double frac = static_cast<double>(step) / hyper.epsilon_decay_steps;
  return hyper.epsilon_start + frac * (hyper.epsilon_end - hyper.epsilon_start);
}

Action epsilon_greedy(std::span<const float> q, double epsilon, Rng& rng) {
  if (epsilon > 0.0 && uniform01(rng) < epsilon)
    return action_from_index(static_cast<int>(uniform_index(rng, kNumActions)));
  return action_from_index(argmax4(q));
}

void AgentHyper::validate() const {
  auto fail = [](const std::string& what) {
    throw std::invalid_argument("agent hyperparameter out of range: " + what);
  };
  if (!(gamma >= 0.0 && gamma < 1.0)) fail("gamma must be in [0, 1)");
  if (!(lr >= 0.0f)) fail("lr must be >= 0");
  if (hidden.empty()) fail("hidden must list at least one width");
  for (int h : hidden)
    if (h < 1) fail("hidden widths must be positive");
  if (batch_size < 1) fail("batch_size must be >= 1");
  if (updates_per_episode < 0) fail("updates_per_episode must be >= 0");
  if (!(epsilon_start >= 0.0 && epsilon_start <= 1.0)) fail("epsilon_start in [0, 1]");
  if (!(epsilon_end >= 0.0 && epsilon_end <= 1.0)) fail("epsilon_end in [0, 1]");
  if (epsilon_decay_steps < 0) fail("epsilon_decay_steps must be >= 0");
  if (target_sync < 1) fail("target_sync must be >= 1");
  if (!(clip > 0.0 && clip < 1.0)) fail("clip must be in (0, 1)");
  if (!(gae_lambda >= 0.0 && gae_lambda <= 1.0)) fail("gae_lambda in [0, 1]");
  if (entropy_coef < 0.0) fail("entropy_coef must be >= 0");
  if (ppo_epochs < 1) fail("ppo_epochs must be >= 1");
  if (episodes_per_update < 1) fail("episodes_per_update must be >= 1");
  if (old_policy_period < 1) fail("old_policy_period must be >= 1");
}

std::string_view to_string(AgentKind kind) {
  return kind == AgentKind::Dqn ? "dqn" : "ppo";
}

AgentKind parse_agent_kind(std::string_view text) {
  if (text == "dqn") return AgentKind::Dqn;
  if (text == "ppo") return AgentKind::Ppo;
  throw std::invalid_argument("unknown agent kind: '" + std::string(text) + "'");
}

}  // namespace dmaze
