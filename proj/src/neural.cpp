#include "dmaze/neural.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "dmaze/kernels.hpp"

namespace dmaze {

template <typename T>
DenseNet<T>::DenseNet(std::vector<LayerSpec> specs) : specs_(std::move(specs)) {
  std::size_t offset = 0;
  for (std::size_t k = 0; k < specs_.size(); ++k) {
    const LayerSpec& s = specs_[k];
    if (s.in <= 0 || s.out <= 0)
      throw std::invalid_argument("layer dimensions must be positive");
    if (k > 0 && specs_[k - 1].out != s.in)
      throw std::invalid_argument("layer " + std::to_string(k) +
                                  " input does not match previous output");
    offsets_.push_back(offset);
    offset += static_cast<std::size_t>(s.in) * s.out + s.out;
  }
  params_.assign(offset, T(0));
}

template <typename T>
DenseNet<T> DenseNet<T>::glorot(std::vector<LayerSpec> specs, Rng& rng) {
  DenseNet net(std::move(specs));
  for (std::size_t k = 0; k < net.specs_.size(); ++k) {
    const LayerSpec& s = net.specs_[k];
    const double limit = std::sqrt(6.0 / (s.in + s.out));
    std::uniform_real_distribution<double> dist(-limit, limit);
    for (T& w : net.weights(k)) w = static_cast<T>(dist(rng));
  }
  return net;
}

template <typename T>
std::span<T> DenseNet<T>::weights(std::size_t layer) {
  const LayerSpec& s = specs_.at(layer);
  return std::span<T>(params_).subspan(offsets_[layer],
                                       static_cast<std::size_t>(s.in) * s.out);
}
template <typename T>
std::span<const T> DenseNet<T>::weights(std::size_t layer) const {
  const LayerSpec& s = specs_.at(layer);
  return std::span<const T>(params_).subspan(
      offsets_[layer], static_cast<std::size_t>(s.in) * s.out);
}
template <typename T>
std::span<T> DenseNet<T>::bias(std::size_t layer) {
  const LayerSpec& s = specs_.at(layer);
  return std::span<T>(params_).subspan(
      offsets_[layer] + static_cast<std::size_t>(s.in) * s.out, s.out);
}
template <typename T>
std::span<const T> DenseNet<T>::bias(std::size_t layer) const {
  const LayerSpec& s = specs_.at(layer);
  return std::span<const T>(params_).subspan(
      offsets_[layer] + static_cast<std::size_t>(s.in) * s.out, s.out);
}

namespace {

template <typename T>
void activate(Activation act, std::span<T> v) {
  switch (act) {
    case Activation::Identity: break;
    case Activation::Relu:
      for (T& x : v) x = x > T(0) ? x : T(0);
      break;
    case Activation::Sigmoid:
      for (T& x : v) x = T(1) / (T(1) + std::exp(-x));
      break;
  }
}

// Weight rows are indexed by input unit, so a forward pass is one axpy per
// non-zero input. Observations are mostly zeros, as are ReLU outputs.
template <typename T>
void layer_forward(const LayerSpec& s, std::span<const T> w,
                   std::span<const T> b, std::span<const T> x,
                   std::span<T> y) {
  const auto& k = kernels::active<T>();
  std::copy(b.begin(), b.end(), y.begin());
  const std::size_t out = static_cast<std::size_t>(s.out);
  for (std::size_t i = 0; i < static_cast<std::size_t>(s.in); ++i) {
    if (x[i] == T(0)) continue;
    k.axpy(x[i], w.data() + i * out, y.data(), out);
  }
  activate(s.activation, y);
}

}  // namespace

template <typename T>
std::vector<T> DenseNet<T>::forward(std::span<const T> input) const {
  if (static_cast<int>(input.size()) != input_dim())
    throw std::invalid_argument("forward: expected input of size " +
                                std::to_string(input_dim()) + ", got " +
                                std::to_string(input.size()));
  std::vector<T> cur(input.begin(), input.end());
  std::vector<T> next;
  for (std::size_t k = 0; k < specs_.size(); ++k) {
    next.assign(static_cast<std::size_t>(specs_[k].out), T(0));
    layer_forward<T>(specs_[k], weights(k), bias(k), cur, next);
    cur.swap(next);
  }
  return cur;
}

template <typename T>
void DenseNet<T>::forward(std::span<const T> input, Tape<T>& tape) const {
  if (static_cast<int>(input.size()) != input_dim())
    throw std::invalid_argument("forward: expected input of size " +
                                std::to_string(input_dim()) + ", got " +
                                std::to_string(input.size()));
  tape.values.resize(specs_.size() + 1);
  tape.values[0].assign(input.begin(), input.end());
  for (std::size_t k = 0; k < specs_.size(); ++k) {
    tape.values[k + 1].assign(static_cast<std::size_t>(specs_[k].out), T(0));
    layer_forward<T>(specs_[k], weights(k), bias(k), tape.values[k],
                     tape.values[k + 1]);
  }
}

template <typename T>
void DenseNet<T>::backward(const Tape<T>& tape, std::span<const T> d_output,
                           std::span<T> grads, std::span<T> d_input) const {
  if (grads.size() != params_.size())
    throw std::invalid_argument("backward: gradient buffer size mismatch");
  if (static_cast<int>(d_output.size()) != output_dim())
    throw std::invalid_argument("backward: output gradient size mismatch");
  const auto& kern = kernels::active<T>();

  std::vector<T> dz(d_output.begin(), d_output.end());
  std::vector<T> dx;
  for (std::size_t k = specs_.size(); k-- > 0;) {
    const LayerSpec& s = specs_[k];
    const std::size_t in = static_cast<std::size_t>(s.in);
    const std::size_t out = static_cast<std::size_t>(s.out);
    const std::vector<T>& a = tape.values[k + 1];
    const std::vector<T>& x = tape.values[k];

    switch (s.activation) {
      case Activation::Identity: break;
      case Activation::Relu:
        for (std::size_t o = 0; o < out; ++o)
          if (!(a[o] > T(0))) dz[o] = T(0);
        break;
      case Activation::Sigmoid:
        for (std::size_t o = 0; o < out; ++o) dz[o] *= a[o] * (T(1) - a[o]);
        break;
    }

    const std::size_t w_off = offsets_[k];
    T* gw = grads.data() + w_off;
    T* gb = gw + in * out;
    for (std::size_t o = 0; o < out; ++o) gb[o] += dz[o];
    for (std::size_t i = 0; i < in; ++i) {
      if (x[i] == T(0)) continue;
      kern.axpy(x[i], dz.data(), gw + i * out, out);
    }

    const bool need_dx = k > 0 || !d_input.empty();
    if (!need_dx) break;
    // Inputs produced by a ReLU at zero get no gradient, skip their dots.
    const bool relu_below = k > 0 && specs_[k - 1].activation == Activation::Relu;
    dx.assign(in, T(0));
    const T* w = params_.data() + w_off;
    for (std::size_t i = 0; i < in; ++i) {
      if (relu_below && x[i] == T(0)) continue;
      dx[i] = kern.dot(w + i * out, dz.data(), out);
    }
    dz.swap(dx);
  }
  if (!d_input.empty()) {
    if (d_input.size() != dz.size())
      throw std::invalid_argument("backward: input gradient size mismatch");
    std::copy(dz.begin(), dz.end(), d_input.begin());
  }
}

std::vector<LayerSpec> mlp_specs(const std::vector<int>& dims,
                                 Activation hidden, Activation head) {
  if (dims.size() < 2) throw std::invalid_argument("mlp needs >= 2 dims");
  std::vector<LayerSpec> specs;
  for (std::size_t i = 0; i + 1 < dims.size(); ++i)
    specs.push_back({dims[i], dims[i + 1], i + 2 == dims.size() ? head : hidden});
  return specs;
}

template <typename T>
std::vector<T> reparameterize(std::span<const T> mu, std::span<const T> logvar,
                              std::span<const T> eps) {
  if (mu.size() != logvar.size() || mu.size() != eps.size())
    throw std::invalid_argument("reparameterize: size mismatch");
  std::vector<T> z(mu.size());
  for (std::size_t i = 0; i < z.size(); ++i)
    z[i] = mu[i] + std::exp(logvar[i] / T(2)) * eps[i];
  return z;
}

template <typename T>
ElboTerms<T> elbo_loss(std::span<const T> x_target, std::span<const T> x_recon,
                       std::span<const T> mu, std::span<const T> logvar) {
  if (x_target.size() != x_recon.size() || mu.size() != logvar.size())
    throw std::invalid_argument("elbo_loss: size mismatch");
  ElboTerms<T> out;
  const T lo = static_cast<T>(kBceClamp);
  const T hi = T(1) - lo;
  for (std::size_t i = 0; i < x_recon.size(); ++i) {
    const T y = x_recon[i];
    if (!(y >= T(0) && y <= T(1)))
      throw std::invalid_argument("elbo_loss: reconstruction outside [0, 1]");
    const T yc = std::clamp(y, lo, hi);
    const T x = x_target[i];
    out.recon -= x * std::log(yc) + (T(1) - x) * std::log(T(1) - yc);
  }
  for (std::size_t j = 0; j < mu.size(); ++j)
    out.kl += mu[j] * mu[j] + std::exp(logvar[j]) - T(1) - logvar[j];
  out.kl *= T(0.5);
  out.total = out.recon + out.kl;
  return out;
}

template <typename T>
void adam_step(std::span<T> params, std::span<const T> grads,
               AdamState<T>& state) {
  if (params.size() != grads.size() || state.m.size() != params.size() ||
      state.v.size() != params.size())
    throw std::invalid_argument("adam_step: size mismatch");
  state.t += 1;
  const auto& h = state.hyper;
  const kernels::AdamCoeffs<T> c{
      h.lr, h.beta1, h.beta2, h.epsilon,
      static_cast<T>(1.0 - std::pow(static_cast<double>(h.beta1),
                                    static_cast<double>(state.t))),
      static_cast<T>(1.0 - std::pow(static_cast<double>(h.beta2),
                                    static_cast<double>(state.t)))};
  kernels::active<T>().adam(params.data(), grads.data(), state.m.data(),
                            state.v.data(), params.size(), c);
}

template <typename T>
DvaeNets<T> make_dvae_nets(const DvaeArchitecture& arch, Rng& rng) {
  if (arch.state_dim <= 0 || arch.latent_dim <= 0)
    throw std::invalid_argument("dvae dimensions must be positive");
  std::vector<int> enc_dims{arch.state_dim + 4};
  enc_dims.insert(enc_dims.end(), arch.hidden.begin(), arch.hidden.end());
  enc_dims.push_back(2 * arch.latent_dim);
  std::vector<int> dec_dims{arch.latent_dim};
  dec_dims.insert(dec_dims.end(), arch.hidden.rbegin(), arch.hidden.rend());
  dec_dims.push_back(arch.state_dim);

  DvaeNets<T> nets;
  nets.encoder = DenseNet<T>::glorot(
      mlp_specs(enc_dims, Activation::Relu, Activation::Identity), rng);
  nets.decoder = DenseNet<T>::glorot(
      mlp_specs(dec_dims, Activation::Relu, Activation::Sigmoid), rng);
  nets.latent_dim = arch.latent_dim;
  return nets;
}

template <typename T>
std::vector<T> dvae_input(std::span<const T> state, int action) {
  if (action < 0 || action >= 4) throw std::invalid_argument("bad action index");
  std::vector<T> x(state.size() + 4, T(0));
  std::copy(state.begin(), state.end(), x.begin());
  x[state.size() + static_cast<std::size_t>(action)] = T(1);
  return x;
}

template <typename T>
void DvaeGrads<T>::zero() {
  std::fill(encoder.begin(), encoder.end(), T(0));
  std::fill(decoder.begin(), decoder.end(), T(0));
}

namespace {

template <typename T>
void check_dvae_shapes(const DvaeNets<T>& nets, std::size_t state_size,
                       std::size_t eps_size) {
  if (static_cast<int>(state_size) != nets.state_dim())
    throw std::invalid_argument("dvae: state size " + std::to_string(state_size) +
                                " does not match model state size " +
                                std::to_string(nets.state_dim()));
  if (static_cast<int>(eps_size) != nets.latent_dim)
    throw std::invalid_argument("dvae: eps size does not match latent size");
}

}  // namespace

template <typename T>
ElboTerms<T> dvae_sample_loss(const DvaeNets<T>& nets, std::span<const T> state,
                              int action, std::span<const T> next_state,
                              std::span<const T> eps, DvaeGrads<T>* grads,
                              T weight, T kl_weight) {
  check_dvae_shapes(nets, state.size(), eps.size());
  if (next_state.size() != state.size())
    throw std::invalid_argument("dvae: next_state size mismatch");
  const std::size_t L = static_cast<std::size_t>(nets.latent_dim);

  Tape<T> enc_tape;
  nets.encoder.forward(dvae_input<T>(state, action), enc_tape);
  const auto enc_out = enc_tape.output();
  std::vector<T> mu(enc_out.begin(), enc_out.begin() + static_cast<std::ptrdiff_t>(L));
  std::vector<T> logvar(L);
  const T lv_min = static_cast<T>(kLogvarMin);
  const T lv_max = static_cast<T>(kLogvarMax);
  for (std::size_t j = 0; j < L; ++j)
    logvar[j] = std::clamp(enc_out[L + j], lv_min, lv_max);
  const std::vector<T> z = reparameterize<T>(mu, logvar, eps);

  Tape<T> dec_tape;
  nets.decoder.forward(z, dec_tape);
  const auto recon = dec_tape.output();
  const ElboTerms<T> terms = elbo_loss<T>(next_state, recon, mu, logvar);
  if (!grads) return terms;

  // dL/drecon through the clamped BCE.
  const T lo = static_cast<T>(kBceClamp);
  const T hi = T(1) - lo;
  std::vector<T> d_recon(recon.size());
  for (std::size_t i = 0; i < recon.size(); ++i) {
    const T y = recon[i];
    const T x = next_state[i];
    d_recon[i] = (y < lo || y > hi) ? T(0)
                                    : weight * (-x / y + (T(1) - x) / (T(1) - y));
  }
  std::vector<T> dz(L);
  nets.decoder.backward(dec_tape, d_recon, grads->decoder, dz);

  std::vector<T> d_enc(2 * L);
  for (std::size_t j = 0; j < L; ++j) {
    const T sigma = std::exp(logvar[j] / T(2));
    d_enc[j] = dz[j] + weight * kl_weight * mu[j];
    const T raw = enc_out[L + j];
    const bool clamped = raw < lv_min || raw > lv_max;
    const T d_logvar =
        dz[j] * eps[j] * sigma / T(2) +
        weight * kl_weight * (std::exp(logvar[j]) - T(1)) / T(2);
    d_enc[L + j] = clamped ? T(0) : d_logvar;
  }
  nets.encoder.backward(enc_tape, d_enc, grads->encoder);
  return terms;
}

template <typename T>
std::vector<T> dvae_predict(const DvaeNets<T>& nets, std::span<const T> state,
                            int action, std::span<const T> eps) {
  check_dvae_shapes(nets, state.size(), eps.size());
  const std::size_t L = static_cast<std::size_t>(nets.latent_dim);
  const std::vector<T> enc_out = nets.encoder.forward(dvae_input<T>(state, action));
  std::vector<T> mu(enc_out.begin(), enc_out.begin() + static_cast<std::ptrdiff_t>(L));
  std::vector<T> logvar(L);
  for (std::size_t j = 0; j < L; ++j)
    logvar[j] = std::clamp(enc_out[L + j], static_cast<T>(kLogvarMin),
                           static_cast<T>(kLogvarMax));
  return nets.decoder.forward(reparameterize<T>(mu, logvar, eps));
}

#define DMAZE_INSTANTIATE(T)                                                   \
  template class DenseNet<T>;                                                  \
  template std::vector<T> reparameterize<T>(std::span<const T>,                \
                                            std::span<const T>,                \
                                            std::span<const T>);               \
  template ElboTerms<T> elbo_loss<T>(std::span<const T>, std::span<const T>,   \
                                     std::span<const T>, std::span<const T>);  \
  template void adam_step<T>(std::span<T>, std::span<const T>, AdamState<T>&); \
  template DvaeNets<T> make_dvae_nets<T>(const DvaeArchitecture&, Rng&);       \
  template std::vector<T> dvae_input<T>(std::span<const T>, int);              \
  template struct DvaeGrads<T>;                                                \
  template ElboTerms<T> dvae_sample_loss<T>(                                   \
      const DvaeNets<T>&, std::span<const T>, int, std::span<const T>,         \
      std::span<const T>, DvaeGrads<T>*, T, T);                                 \
  template std::vector<T> dvae_predict<T>(const DvaeNets<T>&,                  \
                                          std::span<const T>, int,             \
                                          std::span<const T>);

DMAZE_INSTANTIATE(float)
DMAZE_INSTANTIATE(double)

#undef DMAZE_INSTANTIATE

}  // namespace dmaze
