#include "dmaze/dvae.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace dmaze {

RunStats run_agent(const Environment& env, const ActFn& policy,
                   std::size_t episodes, ReplayBuffer& buffer,
                   const RunOptions& options) {
  if (buffer.kind() != BufferKind::Real)
    throw std::invalid_argument("run_agent writes to a real replay buffer");
  RunStats stats;
  std::size_t steps_total = 0;
  for (std::size_t ep = 0; ep < episodes; ++ep) {
    MazeState state =
        env.reset(derive_seed(options.base_seed, "episode", ep), options.start_region);
    Rng rng(derive_seed(options.base_seed, "policy", ep));
    ObservationTensor obs = observe(state);
    bool terminal = false;
    while (!terminal) {
      if (++steps_total > options.step_cap)
        throw std::runtime_error("run_agent exceeded its step cap");
      const Action a = policy(state, obs, rng);
      StepResult res = step(state, a);
      ObservationTensor next_obs = observe(res.state);
      buffer.push(Transition{obs, a, static_cast<float>(res.reward), next_obs,
                             reached_goal(res.state)});
      ++stats.transitions;
      terminal = res.terminal;
      if (terminal && reached_goal(res.state)) ++stats.goals_reached;
      state = std::move(res.state);
      obs = std::move(next_obs);
    }
    ++stats.episodes;
  }
  return stats;
}

float kl_weight_at(const DvaeHyper& hyper, int epoch) {
  if (hyper.kl_warmup_epochs <= 0 || epoch >= hyper.kl_warmup_epochs) return hyper.kl_weight;
  return hyper.kl_weight * static_cast<float>(epoch) /
         static_cast<float>(hyper.kl_warmup_epochs);
}

DvaeParams init_dvae(int state_dim, const DvaeHyper& hyper) {
  DvaeArchitecture arch{state_dim, hyper.latent_dim, hyper.hidden};
  Rng rng(derive_seed(hyper.seed, "dvae-init"));
  DvaeParams p;
  p.nets = make_dvae_nets<float>(arch, rng);
  p.encoder_opt = AdamState<float>(p.nets.encoder.param_count(), hyper.adam);
  p.decoder_opt = AdamState<float>(p.nets.decoder.param_count(), hyper.adam);
  return p;
}

std::vector<EpochStats> continue_dvae_training(DvaeParams& params,
                                               const ReplayBuffer& buffer,
                                               const DvaeHyper& hyper,
                                               int first_epoch,
                                               const EpochCallback& on_epoch) {
  if (buffer.empty()) throw std::invalid_argument("train_dvae: empty replay buffer");
  if (static_cast<int>(buffer.shape()->size()) != params.state_dim())
    throw std::invalid_argument("train_dvae: buffer state size does not match model");
  if (hyper.batch_size < 1) throw std::invalid_argument("batch size must be >= 1");

  const std::size_t n = buffer.size();
  const std::size_t L = static_cast<std::size_t>(params.latent_dim());
  DvaeGrads<float> grads(params.nets);
  std::vector<std::size_t> order(n);
  std::vector<float> eps(L);
  std::normal_distribution<float> normal(0.0f, 1.0f);
  std::vector<EpochStats> curve;

  for (int e = 0; e < hyper.epochs; ++e) {
    const int epoch = first_epoch + e;
    Rng rng(derive_seed(hyper.seed, "dvae-epoch", static_cast<std::uint64_t>(epoch)));
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::shuffle(order.begin(), order.end(), rng);
    const float beta = kl_weight_at(hyper, epoch);

    double sum_loss = 0.0, sum_recon = 0.0, sum_kl = 0.0;
    for (std::size_t start = 0; start < n; start += static_cast<std::size_t>(hyper.batch_size)) {
      const std::size_t end = std::min(n, start + static_cast<std::size_t>(hyper.batch_size));
      const float weight = 1.0f / static_cast<float>(end - start);
      grads.zero();
      for (std::size_t b = start; b < end; ++b) {
        const Transition& t = buffer[order[b]];
        for (float& v : eps) v = normal(rng);
        const ElboTerms<float> terms = dvae_sample_loss<float>(
            params.nets, t.state.values, action_index(t.action),
            t.next_state.values, eps, &grads, weight, beta);
        sum_loss += terms.total;
        sum_recon += terms.recon;
        sum_kl += terms.kl;
      }
      adam_step<float>(params.nets.encoder.params(), grads.encoder, params.encoder_opt);
      adam_step<float>(params.nets.decoder.params(), grads.decoder, params.decoder_opt);
    }
    const double dn = static_cast<double>(n);
    EpochStats stats{epoch, sum_loss / dn, sum_recon / dn, sum_kl / dn};
    curve.push_back(stats);
    if (on_epoch) on_epoch(stats);
  }
  return curve;
}

DvaeTraining train_dvae(const ReplayBuffer& buffer, const DvaeHyper& hyper,
                        const EpochCallback& on_epoch) {
  if (buffer.empty()) throw std::invalid_argument("train_dvae: empty replay buffer");
  DvaeTraining out;
  out.params = init_dvae(static_cast<int>(buffer.shape()->size()), hyper);
  out.curve = continue_dvae_training(out.params, buffer, hyper, 0, on_epoch);
  return out;
}

ObservationTensor dream_step(const DvaeParams& params,
                             const ObservationTensor& state, Action action,
                             EpsMode eps_mode, Rng* rng) {
  if (static_cast<int>(state.size()) != params.state_dim())
    throw std::invalid_argument("dream_step: state shape does not match model");
  std::vector<float> eps(static_cast<std::size_t>(params.latent_dim()), 0.0f);
  if (eps_mode == EpsMode::Sample) {
    if (!rng) throw std::invalid_argument("dream_step: sampling needs an rng");
    std::normal_distribution<float> normal(0.0f, 1.0f);
    for (float& v : eps) v = normal(*rng);
  }
  ObservationTensor out(state.channels, state.height, state.width);
  out.values = dvae_predict<float>(params.nets, state.values,
                                   action_index(action), eps);
  return out;
}

std::vector<ObservationTensor> dream_trajectory(
    const DvaeParams& params, const ObservationTensor& s0,
    const std::vector<Action>& actions, EpsMode eps_mode, Rng* rng) {
  if (actions.empty())
    throw std::invalid_argument("dream_trajectory needs at least one action");
  std::vector<ObservationTensor> states;
  states.reserve(actions.size());
  const ObservationTensor* cur = &s0;
  for (const Action a : actions) {
    states.push_back(dream_step(params, *cur, a, eps_mode, rng));
    cur = &states.back();
  }
  return states;
}

ReplayBuffer generate_artificial_buffer(const DvaeParams& params,
                                        const ReplayBuffer& real,
                                        EpsMode eps_mode, std::uint64_t seed) {
  if (real.empty())
    throw std::invalid_argument("generate_artificial_buffer: empty replay buffer");
  ReplayBuffer dreamed(real.capacity(), BufferKind::Dreamed);
  Rng rng(derive_seed(seed, "dream-buffer"));
  ObservationTensor chained;
  for (std::size_t i = 0; i < real.size(); ++i) {
    const Transition& d = real[i];
    const bool anchor =
        i == 0 || real[i - 1].terminal || real[i - 1].next_state != d.state;
    ObservationTensor s_hat = anchor ? d.state : std::move(chained);
    ObservationTensor next_hat = dream_step(params, s_hat, d.action, eps_mode, &rng);
    chained = next_hat;
    dreamed.push(Transition{std::move(s_hat), d.action, d.reward,
                            std::move(next_hat), d.terminal});
  }
  return dreamed;
}

std::vector<LabeledTransition> enumerate_transitions(const Environment& env) {
  if (env.scenario->goal_placement != GoalPlacement::Corner)
    throw std::invalid_argument("enumerate_transitions needs a fixed goal");
  const Cell goal = corner_goal(*env.grid);
  std::vector<LabeledTransition> out;
  for (const Cell c : env.grid->open_cells()) {
    if (c == goal) continue;
    const MazeState s{env.grid, env.scenario, c, goal, 0};
    const ObservationTensor obs = observe(s);
    for (const Action a : kAllActions) {
      const StepResult r = step(s, a);
      out.push_back({c, a,
                     Transition{obs, a, static_cast<float>(r.reward),
                                observe(r.state), r.terminal}});
    }
  }
  return out;
}

double mean_abs_error(const ObservationTensor& a, const ObservationTensor& b) {
  if (!a.same_shape(b)) throw std::invalid_argument("mean_abs_error: shape mismatch");
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    sum += std::abs(static_cast<double>(a.values[i]) - b.values[i]);
  return sum / static_cast<double>(a.size());
}

std::vector<double> horizon_errors(const DvaeParams& params,
                                   const Environment& env, int horizon,
                                   int trials, std::uint64_t seed) {
  if (horizon < 1 || trials < 1)
    throw std::invalid_argument("horizon_errors needs horizon, trials >= 1");
  std::vector<double> err(static_cast<std::size_t>(horizon), 0.0);
  const Representation rep = env.representation();
  for (int t = 0; t < trials; ++t) {
    Rng rng(derive_seed(seed, "horizon", static_cast<std::uint64_t>(t)));
    std::vector<Action> actions(static_cast<std::size_t>(horizon));
    std::vector<Cell> truth;
    MazeState start;
    for (int attempt = 0;; ++attempt) {
      if (attempt > 10000)
        throw std::runtime_error("horizon_errors: no non-terminating rollout found");
      start = env.reset(rng());
      for (Action& a : actions) a = action_from_index(static_cast<int>(uniform_index(rng, 4)));
      truth.clear();
      MazeState s = start;
      bool ok = true;
      for (std::size_t k = 0; k < actions.size(); ++k) {
        StepResult r = step(s, actions[k]);
        truth.push_back(r.state.player);
        if (r.terminal && k + 1 < actions.size()) {
          ok = false;
          break;
        }
        s = std::move(r.state);
      }
      if (ok) break;
    }
    const auto dreamed = dream_trajectory(params, observe(start), actions);
    for (std::size_t k = 0; k < dreamed.size(); ++k) {
      const Cell p = player_position(dreamed[k], rep);
      err[k] += std::abs(p.x - truth[k].x) + std::abs(p.y - truth[k].y);
    }
  }
  for (double& e : err) e /= trials;
  return err;
}

}  // namespace dmaze
