#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "dmaze/agents.hpp"

namespace dmaze {
namespace {

DenseNet<float> make_mlp(int in, const std::vector<int>& hidden, int out, Rng& rng) {
  std::vector<int> dims{in};
  dims.insert(dims.end(), hidden.begin(), hidden.end());
  dims.push_back(out);
  return DenseNet<float>::glorot(
      mlp_specs(dims, Activation::Relu, Activation::Identity), rng);
}

// d(-surrogate - beta * H)/dlogits for one sample, scaled by `scale`.
void actor_logit_grad(const std::array<double, kNumActions>& p, int action,
                      double ratio, double advantage, double clip,
                      double entropy_coef, double weight, float scale,
                      std::array<float, kNumActions>& out) {
  const bool unclipped = advantage >= 0.0 ? ratio <= 1.0 + clip : ratio >= 1.0 - clip;
  const double g = unclipped ? advantage : 0.0;
  double entropy = 0.0;
  for (double pk : p)
    if (pk > 0.0) entropy -= pk * std::log(pk);
  for (int k = 0; k < kNumActions; ++k) {
    const double pk = p[static_cast<std::size_t>(k)];
    const double d_surr = -weight * g * ratio * ((k == action ? 1.0 : 0.0) - pk);
    const double d_ent = pk > 0.0 ? entropy_coef * pk * (std::log(pk) + entropy) : 0.0;
    out[static_cast<std::size_t>(k)] = static_cast<float>((d_surr + d_ent) * scale);
  }
}

// Replay objective summed over every action instead of the logged one:
// sum_a pi_old(a) * min(r_a A_a, clip(r_a) A_a) with r_a = pi(a) / pi_old(a).
// This is the expectation, over the uniform behaviour policy, of the sampled
// surrogate weighted by pi_old / mu. d/dlogits of (-objective - beta * H),
// scaled by `scale`; advantages are multiplied by `adv_scale` first.
void actor_logit_grad(const std::array<double, kNumActions>& p,
                      const std::array<double, kNumActions>& p_old,
                      const std::array<double, kNumActions>& advantage,
                      double adv_scale, double clip, double entropy_coef,
                      float scale, std::array<float, kNumActions>& out) {
  double entropy = 0.0;
  for (double pk : p)
    if (pk > 0.0) entropy -= pk * std::log(pk);
  std::array<double, kNumActions> g{};
  for (std::size_t a = 0; a < kNumActions; ++a) {
    const double adv = advantage[a] * adv_scale;
    const double ratio = p[a] / std::max(p_old[a], 1e-12);
    const bool unclipped = adv >= 0.0 ? ratio <= 1.0 + clip : ratio >= 1.0 - clip;
    // p_old(a) * d(ratio)/dlogits = d(pi(a))/dlogits
    if (unclipped) g[a] = adv;
  }
  double mean_g = 0.0;
  for (std::size_t a = 0; a < kNumActions; ++a) mean_g += p[a] * g[a];
  for (std::size_t k = 0; k < kNumActions; ++k) {
    const double d_surr = -p[k] * (g[k] - mean_g);
    const double d_ent = p[k] > 0.0 ? entropy_coef * p[k] * (std::log(p[k]) + entropy) : 0.0;
    out[k] = static_cast<float>((d_surr + d_ent) * scale);
  }
}

}  // namespace

double clipped_surrogate(double ratio, double advantage, double clip) {
  const double clipped = std::clamp(ratio, 1.0 - clip, 1.0 + clip);
  return std::min(ratio * advantage, clipped * advantage);
}

PpoLearner::PpoLearner(int obs_dim, const AgentHyper& hyper, std::uint64_t seed)
    : hyper_(hyper) {
  hyper_.validate();
  Rng rng(derive_seed(seed, "ppo-init"));
  policy_ = make_mlp(obs_dim, hyper_.hidden, kNumActions, rng);
  value_ = make_mlp(obs_dim, hyper_.hidden, 1, rng);
  critic_ = make_mlp(obs_dim, hyper_.hidden, kNumActions, rng);
  critic_target_ = critic_;
  policy_old_ = policy_;
  const AdamHyper<float> adam{hyper_.lr};
  policy_opt_ = AdamState<float>(policy_.param_count(), adam);
  value_opt_ = AdamState<float>(value_.param_count(), adam);
  critic_opt_ = AdamState<float>(critic_.param_count(), adam);
}

std::array<double, kNumActions> PpoLearner::probabilities(
    const ObservationTensor& obs) const {
  return softmax4(policy_.forward(obs.values));
}

Action PpoLearner::sample(const ObservationTensor& obs, Rng& rng) const {
  const auto p = probabilities(obs);
  const double u = uniform01(rng);
  double acc = 0.0;
  for (int k = 0; k < kNumActions; ++k) {
    acc += p[static_cast<std::size_t>(k)];
    if (u < acc) return action_from_index(k);
  }
  return Action::Right;
}

Action PpoLearner::greedy(const ObservationTensor& obs) const {
  return action_from_index(argmax4(policy_.forward(obs.values)));
}

bool PpoLearner::train_episode(const MazeState& start, Rng& rng) {
  const int cap = start.time_limit()
                      ? *start.time_limit()
                      : 4 * static_cast<int>(start.grid->cell_count());
  Episode ep;
  MazeState s = start;
  while (!is_terminal(s) && s.step_count < cap) {
    ObservationTensor obs = observe(s);
    const auto logits = policy_.forward(obs.values);
    const auto p = softmax4(logits);
    const double u = uniform01(rng);
    int a = kNumActions - 1;
    double acc = 0.0;
    for (int k = 0; k < kNumActions; ++k) {
      acc += p[static_cast<std::size_t>(k)];
      if (u < acc) {
        a = k;
        break;
      }
    }
    const float v = value_.forward(obs.values)[0];
    StepResult r = step(s, action_from_index(a));
    ep.steps.push_back(Step{std::move(obs.values), a, static_cast<float>(r.reward),
                            static_cast<float>(std::log(p[static_cast<std::size_t>(a)])), v});
    s = std::move(r.state);
  }
  ep.reached_goal = reached_goal(s);
  if (!ep.reached_goal) ep.bootstrap = value_.forward(observe(s).values)[0];
  if (!ep.steps.empty()) pending_.push_back(std::move(ep));
  if (static_cast<int>(pending_.size()) < hyper_.episodes_per_update) return false;
  ppo_update(rng);
  pending_.clear();
  return true;
}

void PpoLearner::ppo_update(Rng& rng) {
  struct Sample {
    const Step* step;
    double advantage;
    double ret;
  };
  std::vector<Sample> samples;
  const double gamma = hyper_.gamma;
  const double lambda = hyper_.gae_lambda;
  for (const Episode& ep : pending_) {
    const std::size_t T = ep.steps.size();
    std::vector<double> adv(T);
    double gae = 0.0;
    for (std::size_t t = T; t-- > 0;) {
      const bool last = t + 1 == T;
      const double next_v = last ? (ep.reached_goal ? 0.0 : ep.bootstrap)
                                 : ep.steps[t + 1].value;
      const double delta = ep.steps[t].reward + gamma * next_v - ep.steps[t].value;
      gae = delta + (last ? 0.0 : gamma * lambda * gae);
      adv[t] = gae;
    }
    for (std::size_t t = 0; t < T; ++t)
      samples.push_back({&ep.steps[t], adv[t], adv[t] + ep.steps[t].value});
  }
  if (samples.empty()) return;

  double mean = 0.0;
  for (const Sample& s : samples) mean += s.advantage;
  mean /= static_cast<double>(samples.size());
  double var = 0.0;
  for (const Sample& s : samples) var += (s.advantage - mean) * (s.advantage - mean);
  const double sd = std::sqrt(var / static_cast<double>(samples.size())) + 1e-8;
  for (Sample& s : samples) s.advantage = (s.advantage - mean) / sd;

  std::vector<std::size_t> order(samples.size());
  std::vector<float> pgrad(policy_.param_count());
  std::vector<float> vgrad(value_.param_count());
  Tape<float> ptape, vtape;
  std::array<float, kNumActions> dlogits{};
  const std::size_t mb = static_cast<std::size_t>(hyper_.batch_size);
  for (int epoch = 0; epoch < hyper_.ppo_epochs; ++epoch) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t start = 0; start < order.size(); start += mb) {
      const std::size_t end = std::min(order.size(), start + mb);
      const float scale = 1.0f / static_cast<float>(end - start);
      std::fill(pgrad.begin(), pgrad.end(), 0.0f);
      std::fill(vgrad.begin(), vgrad.end(), 0.0f);
      for (std::size_t i = start; i < end; ++i) {
        const Sample& s = samples[order[i]];
        policy_.forward(s.step->obs, ptape);
        const auto p = softmax4(ptape.output());
        const int a = s.step->action;
        const double logp = std::log(std::max(p[static_cast<std::size_t>(a)], 1e-12));
        const double ratio = std::exp(logp - s.step->logp);
        actor_logit_grad(p, a, ratio, s.advantage, hyper_.clip,
                         hyper_.entropy_coef, 1.0, scale, dlogits);
        policy_.backward(ptape, dlogits, pgrad);

        value_.forward(s.step->obs, vtape);
        const float dv = static_cast<float>(2.0 * (vtape.output()[0] - s.ret)) * scale;
        value_.backward(vtape, std::span<const float>(&dv, 1), vgrad);
      }
      adam_step<float>(policy_.params(), pgrad, policy_opt_);
      adam_step<float>(value_.params(), vgrad, value_opt_);
    }
  }
}

void PpoLearner::update_from_buffer(const ReplayBuffer& buffer, Rng& rng) {
  if (buffer.empty()) throw std::invalid_argument("ppo update: empty buffer");
  if (replay_updates_ % hyper_.old_policy_period == 0) policy_old_ = policy_;

  const std::size_t batch = static_cast<std::size_t>(hyper_.batch_size);
  const float scale = 1.0f / static_cast<float>(batch);
  struct Sample {
    const Transition* t;
    Tape<float> critic_tape;
    double q_target;
    std::array<double, kNumActions> advantage;
  };
  std::vector<Sample> samples(batch);
  for (Sample& s : samples) {
    s.t = &buffer[uniform_index(rng, buffer.size())];
    critic_.forward(s.t->state.values, s.critic_tape);
    const auto q = s.critic_tape.output();
    const auto p = softmax4(policy_.forward(s.t->state.values));
    double baseline = 0.0;
    for (std::size_t k = 0; k < kNumActions; ++k) baseline += p[k] * q[k];
    for (std::size_t k = 0; k < kNumActions; ++k) s.advantage[k] = q[k] - baseline;
    s.q_target = s.t->reward;
    if (!s.t->terminal) {
      // Greedy target: the critic estimates optimal action values, so the
      // actor is not limited to improving on its own current returns.
      const auto qn = critic_target_.forward(s.t->next_state.values);
      s.q_target += hyper_.gamma * *std::max_element(qn.begin(), qn.end());
    }
  }

  double var = 0.0;
  for (const Sample& s : samples)
    for (double a : s.advantage) var += a * a;
  const double sd = std::sqrt(var / static_cast<double>(batch * kNumActions)) + 1e-8;

  std::vector<float> pgrad(policy_.param_count(), 0.0f);
  std::vector<float> cgrad(critic_.param_count(), 0.0f);
  Tape<float> ptape;
  std::array<float, kNumActions> dlogits{};
  std::array<float, kNumActions> dq{};
  for (Sample& s : samples) {
    policy_.forward(s.t->state.values, ptape);
    const auto p = softmax4(ptape.output());
    const auto p_old = softmax4(policy_old_.forward(s.t->state.values));
    actor_logit_grad(p, p_old, s.advantage, 1.0 / sd, hyper_.clip,
                     hyper_.entropy_coef, scale, dlogits);
    policy_.backward(ptape, dlogits, pgrad);

    const int a = action_index(s.t->action);
    dq.fill(0.0f);
    const double err = s.critic_tape.output()[static_cast<std::size_t>(a)] - s.q_target;
    dq[static_cast<std::size_t>(a)] = static_cast<float>(2.0 * err) * scale;
    critic_.backward(s.critic_tape, dq, cgrad);
  }
  adam_step<float>(policy_.params(), pgrad, policy_opt_);
  adam_step<float>(critic_.params(), cgrad, critic_opt_);
  ++replay_updates_;
  if (replay_updates_ % hyper_.target_sync == 0) critic_target_ = critic_;
}

PpoLearner ppo_train(const Environment& env, const AgentHyper& hyper,
                     int episodes, std::uint64_t seed) {
  const TensorShape shape = env.observation_shape();
  PpoLearner learner(static_cast<int>(shape.size()), hyper, seed);
  Rng rng(derive_seed(seed, "ppo-rollouts"));
  for (int i = 0; i < episodes; ++i)
    learner.train_episode(env.reset(derive_seed(seed, "ppo-episode",
                                                static_cast<std::uint64_t>(i))),
                          rng);
  return learner;
}

PpoLearner ppo_train(const ReplayBuffer& buffer, int obs_dim,
                     const AgentHyper& hyper, int updates, std::uint64_t seed) {
  if (buffer.empty()) throw std::invalid_argument("ppo_train: empty replay buffer");
  PpoLearner learner(obs_dim, hyper, seed);
  Rng rng(derive_seed(seed, "ppo-batches"));
  for (int i = 0; i < updates; ++i) learner.update_from_buffer(buffer, rng);
  return learner;
}

}  // namespace dmaze
