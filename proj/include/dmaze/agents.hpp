#pragma once
// Policies and learners: uniform exploration, the tabular Q oracle, DQN and
// PPO (on-policy against the environment, or replaying a transition buffer),
// plus the optimal-path performance metric.

#include <array>
#include <functional>
#include <optional>
#include <string_view>
#include <vector>

#include "dmaze/dvae.hpp"
#include "dmaze/environment.hpp"
#include "dmaze/neural.hpp"
#include "dmaze/replay.hpp"

namespace dmaze {

class Policy {
 public:
  virtual ~Policy() = default;
  virtual Action act(const ObservationTensor& obs, Rng& rng) const = 0;
};

ActFn as_act_fn(const Policy& policy);

// Uniform over the four actions.
Action random_policy(const ObservationTensor& obs, Rng& rng);

enum class ExplorationKind : std::uint8_t { Uniform, GaussianLogits };

class RandomPolicy final : public Policy {
 public:
  explicit RandomPolicy(ExplorationKind kind = ExplorationKind::Uniform,
                        double sigma = 1.0)
      : kind_(kind), sigma_(sigma) {}
  Action act(const ObservationTensor& obs, Rng& rng) const override;

 private:
  ExplorationKind kind_;
  double sigma_;
};

// argmax of a network's output (Q-values or policy logits). Ties go to the
// lowest action index.
class GreedyNetPolicy final : public Policy {
 public:
  explicit GreedyNetPolicy(DenseNet<float> net) : net_(std::move(net)) {}
  Action act(const ObservationTensor& obs, Rng& rng) const override;
  const DenseNet<float>& net() const { return net_; }

 private:
  DenseNet<float> net_;
};

int argmax4(std::span<const float> v);

// ---- tabular oracle -------------------------------------------------------

struct DiscreteTransition {
  std::size_t state = 0;
  Action action = Action::Up;
  double reward = 0.0;
  std::size_t next_state = 0;
  bool terminal = false;
};

class QTable {
 public:
  explicit QTable(std::size_t states) : q_(states * kNumActions, 0.0) {}
  std::size_t states() const { return q_.size() / kNumActions; }
  double& at(std::size_t s, Action a) {
    return q_[s * kNumActions + static_cast<std::size_t>(action_index(a))];
  }
  double at(std::size_t s, Action a) const {
    return q_[s * kNumActions + static_cast<std::size_t>(action_index(a))];
  }
  double max_value(std::size_t s) const;
  Action greedy(std::size_t s) const;
  friend bool operator==(const QTable&, const QTable&) = default;

 private:
  std::vector<double> q_;
};

// Q(s,a) += alpha * (r + gamma * max_a' Q(s',a') * (1 - terminal) - Q(s,a))
void q_update(QTable& table, const DiscreteTransition& t, double alpha,
              double gamma);

// ---- deep learners --------------------------------------------------------

struct AgentHyper {
  double gamma = 0.99;
  float lr = 1e-3f;
  std::vector<int> hidden = {64};
  int batch_size = 128;
  // Minibatch updates per budget episode for buffer-trained learners.
  int updates_per_episode = 4;

  // DQN
  double epsilon_start = 1.0;
  double epsilon_end = 0.05;
  int epsilon_decay_steps = 10000;
  int target_sync = 200;

  // PPO
  double clip = 0.2;
  double gae_lambda = 0.95;
  double entropy_coef = 0.01;
  int ppo_epochs = 4;
  int episodes_per_update = 8;
  // Replay mode: number of updates between refreshes of pi_old.
  int old_policy_period = 10;

  // Throws std::invalid_argument when a value is outside its range.
  void validate() const;
};

// Linear schedule from epsilon_start to epsilon_end over decay steps.
double epsilon_at(const AgentHyper& hyper, std::int64_t step);

// With probability epsilon a uniform action, otherwise argmax of q.
Action epsilon_greedy(std::span<const float> q, double epsilon, Rng& rng);

class DqnLearner {
 public:
  DqnLearner(int obs_dim, const AgentHyper& hyper, std::uint64_t seed);

  // One minibatch step on mean squared TD error against the target network.
  // Syncs the target every hyper.target_sync updates. Returns the loss.
  double update(const ReplayBuffer& buffer, Rng& rng);
  void sync_target();

  std::vector<float> q_values(const ObservationTensor& obs) const;
  Action act(const ObservationTensor& obs, double epsilon, Rng& rng) const;

  const DenseNet<float>& online() const { return online_; }
  const DenseNet<float>& target() const { return target_; }
  std::int64_t updates() const { return updates_; }
  const AgentHyper& hyper() const { return hyper_; }

 private:
  AgentHyper hyper_;
  DenseNet<float> online_;
  DenseNet<float> target_;
  AdamState<float> opt_;
  std::int64_t updates_ = 0;
};

// Throws std::invalid_argument on an empty buffer.
DqnLearner dqn_train(const ReplayBuffer& buffer, const AgentHyper& hyper,
                     int steps, std::uint64_t seed);

// Per-sample PPO objective min(r A, clip(r, 1 - eps, 1 + eps) A).
double clipped_surrogate(double ratio, double advantage, double clip);

std::array<double, kNumActions> softmax4(std::span<const float> logits);

class PpoLearner {
 public:
  PpoLearner(int obs_dim, const AgentHyper& hyper, std::uint64_t seed);

  std::array<double, kNumActions> probabilities(const ObservationTensor& obs) const;
  Action sample(const ObservationTensor& obs, Rng& rng) const;
  Action greedy(const ObservationTensor& obs) const;

  // On-policy: plays one stochastic episode from `start` and stores it; every
  // hyper.episodes_per_update stored episodes triggers a clipped-surrogate
  // update with GAE advantages. Returns true when an update ran.
  bool train_episode(const MazeState& start, Rng& rng);

  // Replay: one minibatch from the buffer. The critic is an action-value
  // head trained toward r + gamma * max Q_target(s', .). The actor maximizes
  // sum_a pi_old(a) * min(r_a A_a, clip(r_a) A_a), r_a = pi(a) / pi_old(a),
  // which is the sampled surrogate weighted by pi_old / mu taken in
  // expectation over the uniform behaviour policy mu that filled the buffer.
  void update_from_buffer(const ReplayBuffer& buffer, Rng& rng);

  const DenseNet<float>& policy_net() const { return policy_; }
  const DenseNet<float>& value_net() const { return value_; }
  const DenseNet<float>& critic_net() const { return critic_; }

 private:
  struct Step {
    std::vector<float> obs;
    int action;
    float reward;
    float logp;
    float value;
  };
  struct Episode {
    std::vector<Step> steps;
    bool reached_goal = false;
    float bootstrap = 0.0f;  // value of the final state when truncated
  };
  void ppo_update(Rng& rng);

  AgentHyper hyper_;
  DenseNet<float> policy_;
  DenseNet<float> value_;   // state value, on-policy mode
  DenseNet<float> critic_;  // action values, replay mode
  DenseNet<float> critic_target_;
  DenseNet<float> policy_old_;
  AdamState<float> policy_opt_;
  AdamState<float> value_opt_;
  AdamState<float> critic_opt_;
  std::vector<Episode> pending_;
  std::int64_t replay_updates_ = 0;
};

PpoLearner ppo_train(const Environment& env, const AgentHyper& hyper,
                     int episodes, std::uint64_t seed);
PpoLearner ppo_train(const ReplayBuffer& buffer, int obs_dim,
                     const AgentHyper& hyper, int updates, std::uint64_t seed);

// ---- evaluation -----------------------------------------------------------

// optimal / actual, clipped to [0, 1]; 0 when the goal was not reached.
double performance_ratio(int optimal_moves, int actual_moves, bool reached);

struct EpisodeOutcome {
  bool reached_goal = false;
  int moves = 0;
  int optimal_moves = 0;
  double performance = 0.0;
};

// Episodes without a scenario time limit are capped at 4 * cell count moves.
EpisodeOutcome run_episode(const Environment& env, const ActFn& policy,
                           const MazeState& start, Rng& rng);

inline constexpr int kRollingWindow = 100;
inline constexpr double kConvergenceThreshold = 0.95;

struct PerformanceReport {
  std::vector<double> per_episode;
  std::vector<double> rolling_mean;
  std::optional<int> convergence_episode;
  int window = kRollingWindow;
  double threshold = kConvergenceThreshold;

  double final_rolling_mean() const {
    return rolling_mean.empty() ? 0.0 : rolling_mean.back();
  }
};

// Rolling mean over the trailing `window` episodes. Convergence is the first
// episode with a full window whose mean reaches the threshold.
PerformanceReport summarize_performance(std::vector<double> per_episode,
                                        int window = kRollingWindow,
                                        double threshold = kConvergenceThreshold);

// Episode i starts from env.reset(derive_seed(seed, "eval", i)).
PerformanceReport evaluate(const Environment& env, const ActFn& policy,
                           int episodes, std::uint64_t seed);
PerformanceReport evaluate(const Environment& env, const Policy& policy,
                           int episodes, std::uint64_t seed);

// ---- training sessions ----------------------------------------------------

enum class AgentKind : std::uint8_t { Dqn, Ppo };
std::string_view to_string(AgentKind kind);
AgentKind parse_agent_kind(std::string_view text);

struct SessionOptions {
  int episodes = 1000;
  std::uint64_t seed = 0;
  // null: PPO trains against the environment (on-policy). Required for DQN.
  const ReplayBuffer* buffer = nullptr;
};

struct SessionResult {
  PerformanceReport report;
  // Network acted on greedily: DQN Q-network or PPO policy logits.
  DenseNet<float> acting_net;
  // Every network of the learner, in DVM1 order.
  std::vector<DenseNet<float>> nets;
};

using EpisodeCallback = std::function<void(int episode, double performance)>;

// Each budget episode does the learner's training work (buffer updates, or
// one on-policy episode), then plays one greedy evaluation episode in the real
// environment; its performance is the episode's score.
SessionResult train_agent_session(AgentKind kind, const Environment& env,
                                  const AgentHyper& hyper,
                                  const SessionOptions& options,
                                  const EpisodeCallback& on_episode = {});

}  // namespace dmaze
