#pragma once
// The dreaming loop: collect real experience, fit the transition model,
// dream single steps and nested trajectories, and build the artificial
// replay buffer.

#include <functional>
#include <optional>
#include <vector>

#include "dmaze/environment.hpp"
#include "dmaze/neural.hpp"
#include "dmaze/replay.hpp"

namespace dmaze {

// Acting interface used while collecting experience. The state is passed for
// scripted/oracle behaviour; learned policies only look at the observation.
using ActFn = std::function<Action(const MazeState& state,
                                   const ObservationTensor& obs, Rng& rng)>;

struct RunOptions {
  std::uint64_t base_seed = 0;
  StartRegion start_region = StartRegion::All;
  // Guard against policies that never terminate in scenarios without a time
  // limit; exceeding it throws std::runtime_error.
  std::size_t step_cap = 1'000'000;
};

struct RunStats {
  std::size_t episodes = 0;
  std::size_t transitions = 0;
  std::size_t goals_reached = 0;
};

// Plays `episodes` episodes, appending one transition per step. A record is
// terminal only when it reaches the goal; time-limit truncation is not
// flagged because the clock is not part of the state. Episode i
// resets from derive_seed(base_seed, "episode", i) and acts with an Rng
// seeded from derive_seed(base_seed, "policy", i).
RunStats run_agent(const Environment& env, const ActFn& policy,
                   std::size_t episodes, ReplayBuffer& buffer,
                   const RunOptions& options);

struct DvaeHyper {
  int epochs = 1000;
  AdamHyper<float> adam{};
  int latent_dim = 32;
  std::vector<int> hidden = {256};
  int batch_size = 32;
  // The KL gradient is scaled by kl_weight * min(1, epoch / kl_warmup_epochs);
  // kl_weight 1 and no ramp is the plain ELBO. Reported losses are always the
  // unscaled ELBO. Without the ramp the posterior collapses on mazes of 8x8
  // and up (the decoder learns the mean next state and ignores z). A final
  // weight below 1 keeps dreamed player planes sharp; at full weight the
  // latent cannot carry the whole next position and the player blurs into
  // neighbouring cells.
  int kl_warmup_epochs = 200;
  float kl_weight = 1.0f;
  std::uint64_t seed = 0;
};

float kl_weight_at(const DvaeHyper& hyper, int epoch);

struct EpochStats {
  int epoch = 0;
  double loss = 0.0;
  double recon = 0.0;
  double kl = 0.0;
};

// Trainable weights plus optimizer state.
struct DvaeParams {
  DvaeNets<float> nets;
  AdamState<float> encoder_opt;
  AdamState<float> decoder_opt;

  int state_dim() const { return nets.state_dim(); }
  int latent_dim() const { return nets.latent_dim; }
};

DvaeParams init_dvae(int state_dim, const DvaeHyper& hyper);

struct DvaeTraining {
  DvaeParams params;
  std::vector<EpochStats> curve;  // one row per epoch
};

using EpochCallback = std::function<void(const EpochStats&)>;

// Minimizes the ELBO of next_state given concat(state, onehot(action)) over
// `hyper.epochs` shuffled passes of D. Throws std::invalid_argument on an
// empty buffer.
DvaeTraining train_dvae(const ReplayBuffer& buffer, const DvaeHyper& hyper,
                        const EpochCallback& on_epoch = {});

// Continues training existing parameters (used by train_dvae).
std::vector<EpochStats> continue_dvae_training(DvaeParams& params,
                                               const ReplayBuffer& buffer,
                                               const DvaeHyper& hyper,
                                               int first_epoch,
                                               const EpochCallback& on_epoch = {});

enum class EpsMode : std::uint8_t { Zero, Sample };

// One dreamed step: decode(encode(concat(s, a))). EpsMode::Sample draws
// the latent noise from `rng`, which must then be non-null.
ObservationTensor dream_step(const DvaeParams& params,
                             const ObservationTensor& state, Action action,
                             EpsMode eps_mode = EpsMode::Zero,
                             Rng* rng = nullptr);

// s_{k+1} = dream_step(s_k, a_k) starting from s0; returns one state per
// action. Throws std::invalid_argument for an empty action list.
std::vector<ObservationTensor> dream_trajectory(
    const DvaeParams& params, const ObservationTensor& s0,
    const std::vector<Action>& actions, EpsMode eps_mode = EpsMode::Zero,
    Rng* rng = nullptr);

// One dreamed record per record of D. Actions, rewards and terminal flags are
// copied. The dreamed state chains from the previous dreamed next state and
// is re-anchored to D's real state at the start of D, after every terminal
// and wherever a record does not continue the previous one (a new episode).
ReplayBuffer generate_artificial_buffer(const DvaeParams& params,
                                        const ReplayBuffer& real,
                                        EpsMode eps_mode = EpsMode::Zero,
                                        std::uint64_t seed = 0);

// Every (player cell, action) pair of a fixed-goal environment: the state is
// the observation with the player on that cell at step 0.
struct LabeledTransition {
  Cell from;
  Action action;
  Transition transition;
};
std::vector<LabeledTransition> enumerate_transitions(const Environment& env);

// Mean absolute per-pixel difference.
double mean_abs_error(const ObservationTensor& a, const ObservationTensor& b);

// Mean Manhattan distance between the dreamed player position (argmax of the
// player plane) and the true one after k nested dream steps, k = 1..horizon.
// Each trial starts from a random reset and a random action sequence that
// does not terminate within `horizon` steps.
std::vector<double> horizon_errors(const DvaeParams& params,
                                   const Environment& env, int horizon,
                                   int trials, std::uint64_t seed);

}  // namespace dmaze
