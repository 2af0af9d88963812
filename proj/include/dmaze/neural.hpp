#pragma once
// Minimal differentiable network core: dense layers with hand-written
// reverse mode, the reparameterized VAE pieces, the ELBO and Adam.
//
// Everything is templated on the scalar type. Production code runs in float;
// the finite-difference checks instantiate double.

#include <cstdint>
#include <span>
#include <vector>

#include "dmaze/rng.hpp"

namespace dmaze {

enum class Activation : std::uint8_t { Identity = 0, Relu = 1, Sigmoid = 2 };

struct LayerSpec {
  int in = 0;
  int out = 0;
  Activation activation = Activation::Identity;
  friend bool operator==(const LayerSpec&, const LayerSpec&) = default;
};

// Activations recorded by a forward pass. values[0] is the input,
// values[k + 1] the (post-activation) output of layer k.
template <typename T>
struct Tape {
  std::vector<std::vector<T>> values;
  std::span<const T> output() const { return values.back(); }
};

template <typename T>
class DenseNet {
 public:
  DenseNet() = default;
  // Zero-initialized parameters.
  explicit DenseNet(std::vector<LayerSpec> specs);

  // Weights uniform in +-sqrt(6 / (fan_in + fan_out)), biases zero.
  static DenseNet glorot(std::vector<LayerSpec> specs, Rng& rng);

  const std::vector<LayerSpec>& layers() const { return specs_; }
  int input_dim() const { return specs_.empty() ? 0 : specs_.front().in; }
  int output_dim() const { return specs_.empty() ? 0 : specs_.back().out; }
  std::size_t param_count() const { return params_.size(); }

  // All parameters, per layer: weights (in x out, row-major), then bias.
  std::span<T> params() { return params_; }
  std::span<const T> params() const { return params_; }
  std::span<T> weights(std::size_t layer);
  std::span<const T> weights(std::size_t layer) const;
  std::span<T> bias(std::size_t layer);
  std::span<const T> bias(std::size_t layer) const;

  std::vector<T> forward(std::span<const T> input) const;
  void forward(std::span<const T> input, Tape<T>& tape) const;

  // Accumulates dLoss/dparams into `grads` (param_count entries) given
  // dLoss/doutput. When `d_input` is non-empty it receives dLoss/dinput.
  void backward(const Tape<T>& tape, std::span<const T> d_output,
                std::span<T> grads, std::span<T> d_input = {}) const;

  template <typename U>
  DenseNet<U> cast() const {
    DenseNet<U> out(specs_);
    auto dst = out.params();
    for (std::size_t i = 0; i < params_.size(); ++i)
      dst[i] = static_cast<U>(params_[i]);
    return out;
  }

  friend bool operator==(const DenseNet&, const DenseNet&) = default;

 private:
  std::vector<LayerSpec> specs_;
  std::vector<std::size_t> offsets_;  // start of each layer's weights
  std::vector<T> params_;
};

// Builds specs for a stack: dims = {in, h1, ..., out}; hidden layers use
// `hidden`, the last layer `head`.
std::vector<LayerSpec> mlp_specs(const std::vector<int>& dims,
                                 Activation hidden, Activation head);

inline constexpr double kLogvarMin = -10.0;
inline constexpr double kLogvarMax = 10.0;
inline constexpr double kBceClamp = 1e-7;

// z = mu + exp(logvar / 2) * eps
template <typename T>
std::vector<T> reparameterize(std::span<const T> mu, std::span<const T> logvar,
                              std::span<const T> eps);

template <typename T>
struct ElboTerms {
  T total = 0;
  T recon = 0;  // binary cross-entropy summed over pixels
  T kl = 0;     // KL(N(mu, exp(logvar)) || N(0, I))
};

// Throws std::invalid_argument on shape mismatch or x_recon outside [0, 1]
// (float sigmoids saturate to exactly 0 or 1; those are clamped).
template <typename T>
ElboTerms<T> elbo_loss(std::span<const T> x_target, std::span<const T> x_recon,
                       std::span<const T> mu, std::span<const T> logvar);

template <typename T>
struct AdamHyper {
  T lr = T(1e-3);
  T beta1 = T(0.9);
  T beta2 = T(0.999);
  T epsilon = T(1e-8);
};

template <typename T>
struct AdamState {
  AdamHyper<T> hyper;
  std::vector<T> m;
  std::vector<T> v;
  std::int64_t t = 0;

  AdamState() = default;
  AdamState(std::size_t n, AdamHyper<T> h) : hyper(h), m(n, T(0)), v(n, T(0)) {}
};

template <typename T>
void adam_step(std::span<T> params, std::span<const T> grads,
               AdamState<T>& state);

// Encoder Q(z|X) maps concat(state, onehot(action)) to (mu, logvar);
// decoder P(X|z) maps a latent back to a state-sized sigmoid output.
struct DvaeArchitecture {
  int state_dim = 0;
  int latent_dim = 32;
  std::vector<int> hidden = {256};
  friend bool operator==(const DvaeArchitecture&,
                         const DvaeArchitecture&) = default;
};

template <typename T>
struct DvaeNets {
  DenseNet<T> encoder;
  DenseNet<T> decoder;
  int latent_dim = 0;

  int state_dim() const { return decoder.output_dim(); }
  std::size_t param_count() const {
    return encoder.param_count() + decoder.param_count();
  }
  friend bool operator==(const DvaeNets&, const DvaeNets&) = default;
};

template <typename T>
DvaeNets<T> make_dvae_nets(const DvaeArchitecture& arch, Rng& rng);

// Builds the encoder input concat(state, onehot(action)).
template <typename T>
std::vector<T> dvae_input(std::span<const T> state, int action);

template <typename T>
struct DvaeGrads {
  std::vector<T> encoder;
  std::vector<T> decoder;
  explicit DvaeGrads(const DvaeNets<T>& nets)
      : encoder(nets.encoder.param_count(), T(0)),
        decoder(nets.decoder.param_count(), T(0)) {}
  void zero();
};

struct DvaeForwardOptions {
  bool need_grad = true;
};

// One sample: encode, reparameterize with the given eps, decode, score with
// the ELBO against next_state. Gradients of
// `weight * (recon + kl_weight * kl)` are accumulated into `grads` when
// non-null; the returned terms are always the unweighted ELBO.
template <typename T>
ElboTerms<T> dvae_sample_loss(const DvaeNets<T>& nets, std::span<const T> state,
                              int action, std::span<const T> next_state,
                              std::span<const T> eps, DvaeGrads<T>* grads,
                              T weight = T(1), T kl_weight = T(1));

// Decoded prediction for (state, action) with the given eps (zeros = mean).
template <typename T>
std::vector<T> dvae_predict(const DvaeNets<T>& nets, std::span<const T> state,
                            int action, std::span<const T> eps);

}  // namespace dmaze
