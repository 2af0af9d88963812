#include <doctest.h>

#include <cmath>
#include <numbers>

#include "dmaze/neural.hpp"
#include "support/gradcheck.hpp"

using namespace dmaze;
using dmaze::testing::max_gradient_error;
using dmaze::testing::random_probe;
using dmaze::testing::relative_error;

namespace {

std::vector<double> vec(std::initializer_list<double> v) { return v; }

}  // namespace

TEST_CASE("identity layer with W = I and zero bias is the identity map") {
  DenseNet<double> net({{3, 3, Activation::Identity}});
  auto w = net.weights(0);
  for (int i = 0; i < 3; ++i) w[static_cast<std::size_t>(i) * 3 + i] = 1.0;
  const auto x = vec({0.5, -2.0, 7.0});
  CHECK(net.forward(x) == x);
}

TEST_CASE("relu on negative pre-activations gives zeros") {
  DenseNet<double> net({{2, 3, Activation::Relu}});
  for (double& b : net.bias(0)) b = -1.0;
  for (double& w : net.weights(0)) w = 0.25;
  CHECK(net.forward(vec({1.0, 1.0})) == vec({0.0, 0.0, 0.0}));
}

TEST_CASE("sigmoid outputs stay strictly inside (0, 1)") {
  Rng rng(5);
  auto net = DenseNet<double>::glorot({{4, 6, Activation::Sigmoid}}, rng);
  for (double scale : {1e-3, 1.0, 5.0, 20.0}) {
    const auto y = net.forward(vec({scale, -scale, 2 * scale, -3 * scale}));
    for (double v : y) {
      CHECK(v > 0.0);
      CHECK(v < 1.0);
    }
  }
}

TEST_CASE("forward rejects a wrong input size and mismatched layer chains") {
  DenseNet<double> net({{3, 2, Activation::Identity}});
  CHECK_THROWS_AS(net.forward(vec({1.0, 2.0})), std::invalid_argument);
  CHECK_THROWS_AS(DenseNet<double>({{3, 2, Activation::Relu}, {4, 1, Activation::Identity}}),
                  std::invalid_argument);
}

TEST_CASE("glorot init respects the bound and zeroes biases") {
  Rng rng(11);
  const auto net = DenseNet<float>::glorot(mlp_specs({10, 6, 4}, Activation::Relu, Activation::Sigmoid), rng);
  CHECK(net.param_count() == 10u * 6 + 6 + 6 * 4 + 4);
  const float b0 = std::sqrt(6.0f / 16.0f), b1 = std::sqrt(6.0f / 10.0f);
  for (float w : net.weights(0)) CHECK(std::abs(w) <= b0);
  for (float w : net.weights(1)) CHECK(std::abs(w) <= b1);
  for (std::size_t k = 0; k < 2; ++k)
    for (float b : net.bias(k)) CHECK(b == 0.0f);
  Rng again(11);
  CHECK(DenseNet<float>::glorot(net.layers(), again) == net);
}

TEST_CASE("reparameterize") {
  CHECK(reparameterize<double>(vec({1.5, -2.0}), vec({0.3, 4.0}), vec({0.0, 0.0})) ==
        vec({1.5, -2.0}));
  CHECK(reparameterize<double>(vec({1.0}), vec({0.0}), vec({0.25})) == vec({1.25}));
  const auto z = reparameterize<double>(vec({0.0}), vec({2.0 * std::numbers::ln2}), vec({1.0}));
  CHECK(z[0] == doctest::Approx(2.0).epsilon(1e-12));
  CHECK_THROWS_AS(reparameterize<double>(vec({0.0}), vec({0.0, 0.0}), vec({0.0})),
                  std::invalid_argument);
}

TEST_CASE("elbo closed-form values") {
  const auto prior = elbo_loss<double>(vec({0.5}), vec({0.5}), vec({0.0}), vec({0.0}));
  CHECK(prior.kl == 0.0);
  CHECK(prior.recon == doctest::Approx(std::numbers::ln2).epsilon(1e-12));
  CHECK(prior.total == doctest::Approx(prior.recon + prior.kl));
  const auto shifted = elbo_loss<double>(vec({0.5}), vec({0.5}), vec({1.0}), vec({0.0}));
  CHECK(shifted.kl == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("elbo rejects reconstructions outside the unit interval") {
  CHECK_THROWS_AS(elbo_loss<double>(vec({1.0}), vec({1.2}), vec({0.0}), vec({0.0})),
                  std::invalid_argument);
  CHECK_THROWS_AS(elbo_loss<double>(vec({1.0}), vec({-0.1}), vec({0.0}), vec({0.0})),
                  std::invalid_argument);
  CHECK_THROWS_AS(elbo_loss<double>(vec({1.0, 0.0}), vec({0.5}), vec({0.0}), vec({0.0})),
                  std::invalid_argument);
  // Saturated sigmoid outputs are clamped, giving a finite loss.
  const auto sat = elbo_loss<double>(vec({1.0}), vec({0.0}), vec({0.0}), vec({0.0}));
  CHECK(std::isfinite(sat.recon));
  CHECK(sat.recon == doctest::Approx(-std::log(kBceClamp)));
}

TEST_CASE("kl term is non-negative across the clamped logvar range") {
  Rng rng(3);
  std::uniform_real_distribution<double> mu_d(-5.0, 5.0), lv_d(kLogvarMin, kLogvarMax);
  for (int trial = 0; trial < 2000; ++trial) {
    std::vector<double> mu(3), lv(3);
    for (int j = 0; j < 3; ++j) {
      mu[static_cast<std::size_t>(j)] = mu_d(rng);
      lv[static_cast<std::size_t>(j)] = lv_d(rng);
    }
    CHECK(elbo_loss<double>(vec({0.5}), vec({0.5}), mu, lv).kl >= 0.0);
  }
}

TEST_CASE("backward on a 6-parameter net matches central differences") {
  Rng rng(21);
  auto net = DenseNet<double>::glorot({{1, 1, Activation::Sigmoid}, {1, 2, Activation::Identity}}, rng);
  REQUIRE(net.param_count() == 6);
  for (std::size_t k = 0; k < 2; ++k)
    for (double& b : net.bias(k)) b = 0.2;
  const auto x = vec({0.7});
  const auto target = vec({0.3, -0.4});
  auto loss = [&](const DenseNet<double>& n) {
    const auto y = n.forward(x);
    return 0.5 * ((y[0] - target[0]) * (y[0] - target[0]) + (y[1] - target[1]) * (y[1] - target[1]));
  };
  Tape<double> tape;
  net.forward(x, tape);
  std::vector<double> grads(net.param_count(), 0.0);
  const auto y = tape.output();
  net.backward(tape, vec({y[0] - target[0], y[1] - target[1]}), grads);
  const double h = dmaze::testing::kFdStep;
  for (std::size_t i = 0; i < net.param_count(); ++i) {
    DenseNet<double> up = net, down = net;
    up.params()[i] += h;
    down.params()[i] -= h;
    const double numeric = (loss(up) - loss(down)) / (2 * h);
    CHECK(relative_error(grads[i], numeric) < 1e-4);
  }
}

TEST_CASE("parameters that do not reach the loss get zero gradient") {
  DenseNet<double> net({{2, 2, Activation::Relu}, {2, 1, Activation::Identity}});
  auto w0 = net.weights(0);
  w0[0] = 1.0;  // unit 0 sees input 0
  w0[2] = 1.0;
  net.bias(0)[1] = -100.0;  // unit 1 is dead
  net.weights(1)[0] = 1.0;
  net.weights(1)[1] = 1.0;
  Tape<double> tape;
  net.forward(vec({1.0, 1.0}), tape);
  std::vector<double> grads(net.param_count(), 0.0);
  net.backward(tape, vec({1.0}), grads);
  // Layer 0 weights into unit 1 (column 1) and its bias.
  CHECK(net.weights(0).size() == 4);
  CHECK(grads[1] == 0.0);
  CHECK(grads[3] == 0.0);
  CHECK(grads[5] == 0.0);
  CHECK(grads[0] != 0.0);
}

TEST_CASE("doubling the loss doubles every gradient") {
  Rng rng(8);
  const auto net = DenseNet<double>::glorot(mlp_specs({3, 4, 2}, Activation::Relu, Activation::Sigmoid), rng);
  Tape<double> tape;
  net.forward(vec({0.2, -0.5, 0.9}), tape);
  std::vector<double> g1(net.param_count(), 0.0), g2(net.param_count(), 0.0);
  net.backward(tape, vec({0.7, -1.1}), g1);
  net.backward(tape, vec({1.4, -2.2}), g2);
  for (std::size_t i = 0; i < g1.size(); ++i) CHECK(g2[i] == doctest::Approx(2 * g1[i]));
}

TEST_CASE("backward accumulates rather than overwrites") {
  Rng rng(9);
  const auto net = DenseNet<double>::glorot(mlp_specs({2, 3, 1}, Activation::Relu, Activation::Identity), rng);
  Tape<double> tape;
  net.forward(vec({0.4, 0.6}), tape);
  std::vector<double> once(net.param_count(), 0.0), twice(net.param_count(), 0.0);
  net.backward(tape, vec({1.0}), once);
  net.backward(tape, vec({1.0}), twice);
  net.backward(tape, vec({1.0}), twice);
  for (std::size_t i = 0; i < once.size(); ++i) CHECK(twice[i] == doctest::Approx(2 * once[i]));
}

TEST_CASE("dvae gradients match central differences on random small models") {
  Rng rng(2024);
  for (int trial = 0; trial < 5; ++trial) {
    const auto probe = random_probe(rng);
    CHECK(probe.nets.param_count() <= 200);
    CHECK(max_gradient_error(probe) < 1e-4);
  }
}

TEST_CASE("dvae architecture invariants") {
  Rng rng(1);
  DvaeArchitecture arch;
  arch.state_dim = 12;
  arch.latent_dim = 3;
  arch.hidden = {8, 5};
  const auto nets = make_dvae_nets<float>(arch, rng);
  CHECK(nets.encoder.input_dim() == 16);
  CHECK(nets.encoder.output_dim() == 6);
  CHECK(nets.decoder.input_dim() == 3);
  CHECK(nets.decoder.output_dim() == 12);
  CHECK(nets.decoder.layers().back().activation == Activation::Sigmoid);
  CHECK(nets.decoder.layers()[0].out == 5);  // decoder mirrors the encoder
  CHECK(dvae_input<float>(std::vector<float>{0.5f, 0.25f}, 2) ==
        std::vector<float>{0.5f, 0.25f, 0, 0, 1, 0});
}

TEST_CASE("forward and the eps = 0 pipeline are deterministic") {
  Rng rng(4);
  DvaeArchitecture arch;
  arch.state_dim = 6;
  arch.latent_dim = 2;
  arch.hidden = {5};
  const auto nets = make_dvae_nets<float>(arch, rng);
  const std::vector<float> s{1, 0, 0, 1, 0, 0}, eps{0, 0};
  const auto a = dvae_predict<float>(nets, s, 3, eps);
  const auto b = dvae_predict<float>(nets, s, 3, eps);
  CHECK(a == b);
  for (float v : a) CHECK((v > 0.0f && v < 1.0f));
}

TEST_CASE("kl weight scales only the kl gradient") {
  Rng rng(77);
  const auto p = random_probe(rng);
  DvaeGrads<double> full(p.nets), none(p.nets), half(p.nets);
  const auto t1 = dvae_sample_loss<double>(p.nets, p.state, p.action, p.next_state, p.eps, &full, 1.0, 1.0);
  const auto t0 = dvae_sample_loss<double>(p.nets, p.state, p.action, p.next_state, p.eps, &none, 1.0, 0.0);
  dvae_sample_loss<double>(p.nets, p.state, p.action, p.next_state, p.eps, &half, 1.0, 0.5);
  CHECK(t0.total == t1.total);  // reported terms are unweighted
  // Gradients are affine in the kl weight.
  for (std::size_t i = 0; i < full.encoder.size(); ++i)
    CHECK(half.encoder[i] == doctest::Approx(0.5 * (full.encoder[i] + none.encoder[i])));
  CHECK(full.decoder == none.decoder);  // the kl term does not reach the decoder
}

TEST_CASE("adam: zero gradient from a fresh state leaves parameters unchanged") {
  std::vector<double> p{1.0, -2.0, 3.0};
  const std::vector<double> g(3, 0.0);
  AdamState<double> st(3, {});
  adam_step<double>(p, g, st);
  CHECK(p == std::vector<double>{1.0, -2.0, 3.0});
  CHECK(st.t == 1);
}

TEST_CASE("adam: first step moves by -lr * sign(g)") {
  // t = 1: m = 0.1 g, v = 0.001 g^2, m_hat = g, v_hat = g^2, so the step is
  // lr * g / (|g| + eps).
  std::vector<double> p{0.0};
  AdamState<double> st(1, {0.001, 0.9, 0.999, 1e-8});
  adam_step<double>(p, std::vector<double>{0.5}, st);
  CHECK(std::abs(p[0] - (-0.001)) < 1e-6);
  CHECK(st.m[0] == doctest::Approx(0.05));
  CHECK(st.v[0] == doctest::Approx(0.00025));
}

TEST_CASE("adam: two identical positive gradients decrease the parameter twice") {
  std::vector<double> p{1.0};
  AdamState<double> st(1, {});
  const std::vector<double> g{0.3};
  adam_step<double>(p, g, st);
  const double after1 = p[0];
  adam_step<double>(p, g, st);
  CHECK(after1 < 1.0);
  CHECK(p[0] < after1);
  CHECK(st.t == 2);
}

TEST_CASE("adam: lr = 0 leaves parameters unchanged") {
  std::vector<float> p{0.25f, -4.0f};
  AdamState<float> st(2, {0.0f, 0.9f, 0.999f, 1e-8f});
  adam_step<float>(p, std::vector<float>{3.0f, -7.0f}, st);
  CHECK(p == std::vector<float>{0.25f, -4.0f});
  CHECK_THROWS_AS(adam_step<float>(p, std::vector<float>{1.0f}, st), std::invalid_argument);
}
