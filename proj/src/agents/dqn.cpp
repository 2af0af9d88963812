#include <stdexcept>

#include "dmaze/agents.hpp"

namespace dmaze {
namespace {

DenseNet<float> make_head(int obs_dim, const std::vector<int>& hidden,
                          int outputs, Rng& rng) {
  std::vector<int> dims{obs_dim};
  dims.insert(dims.end(), hidden.begin(), hidden.end());
  dims.push_back(outputs);
  return DenseNet<float>::glorot(
      mlp_specs(dims, Activation::Relu, Activation::Identity), rng);
}

}  // namespace

DqnLearner::DqnLearner(int obs_dim, const AgentHyper& hyper, std::uint64_t seed)
    : hyper_(hyper) {
  hyper_.validate();
  Rng rng(derive_seed(seed, "dqn-init"));
  online_ = make_head(obs_dim, hyper_.hidden, kNumActions, rng);
  target_ = online_;
  opt_ = AdamState<float>(online_.param_count(), AdamHyper<float>{hyper_.lr});
}

void DqnLearner::sync_target() { target_ = online_; }

std::vector<float> DqnLearner::q_values(const ObservationTensor& obs) const {
  return online_.forward(obs.values);
}

Action DqnLearner::act(const ObservationTensor& obs, double epsilon, Rng& rng) const {
  if (epsilon >= 1.0)
    return action_from_index(static_cast<int>(uniform_index(rng, kNumActions)));
  return epsilon_greedy(q_values(obs), epsilon, rng);
}

double DqnLearner::update(const ReplayBuffer& buffer, Rng& rng) {
  if (buffer.empty()) throw std::invalid_argument("dqn update: empty buffer");
  const std::size_t batch = static_cast<std::size_t>(hyper_.batch_size);
  const float inv_b = 1.0f / static_cast<float>(batch);
  std::vector<float> grads(online_.param_count(), 0.0f);
  Tape<float> tape;
  double loss = 0.0;
  std::array<float, kNumActions> d_out{};
  for (std::size_t b = 0; b < batch; ++b) {
    const Transition& t = buffer[uniform_index(rng, buffer.size())];
    double target = t.reward;
    if (!t.terminal) {
      const auto next_q = target_.forward(t.next_state.values);
      target += hyper_.gamma * next_q[static_cast<std::size_t>(argmax4(next_q))];
    }
    online_.forward(t.state.values, tape);
    const int a = action_index(t.action);
    const double err = tape.output()[static_cast<std::size_t>(a)] - target;
    loss += err * err;
    d_out.fill(0.0f);
    d_out[static_cast<std::size_t>(a)] = static_cast<float>(2.0 * err) * inv_b;
    online_.backward(tape, d_out, grads);
  }
  adam_step<float>(online_.params(), grads, opt_);
  ++updates_;
  if (updates_ % hyper_.target_sync == 0) sync_target();
  return loss / static_cast<double>(batch);
}

DqnLearner dqn_train(const ReplayBuffer& buffer, const AgentHyper& hyper,
                     int steps, std::uint64_t seed) {
  if (buffer.empty()) throw std::invalid_argument("dqn_train: empty replay buffer");
  DqnLearner learner(static_cast<int>(buffer.shape()->size()), hyper, seed);
  Rng rng(derive_seed(seed, "dqn-batches"));
  for (int i = 0; i < steps; ++i) learner.update(buffer, rng);
  return learner;
}

}  // namespace dmaze
