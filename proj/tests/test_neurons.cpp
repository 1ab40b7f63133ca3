#include <doctest.h>

#include "oracles.hpp"
#include "vswno/neurons.hpp"

using namespace vswno;
using namespace vswno::neurons;

namespace {

NeuronLayer layer(NeuronKind kind, Activation sigma, std::vector<double> beta, std::vector<double> threshold,
                  bool trainable = false) {
  const Shape shape{beta.size()};
  return NeuronLayer(kind, sigma, shape, trainable, std::move(beta), std::move(threshold));
}

std::vector<double> run(NeuronLayer& l, const std::vector<std::vector<double>>& steps) {
  std::vector<double> out;
  l.reset_state();
  for (const auto& z : steps) {
    const Tensor y = l.step(Tensor::from({z.size()}, z));
    out.insert(out.end(), y.data().begin(), y.data().end());
  }
  return out;
}

}  // namespace

TEST_SUITE("neurons") {

TEST_CASE("LIF hand simulations") {
  auto l = layer(NeuronKind::LIF, Activation::Identity, {1.0}, {1.0});
  CHECK(run(l, {{0.5}, {0.6}}) == std::vector<double>{0, 1});
  CHECK(l.membrane()[0] == 0.0);

  auto no_leak = layer(NeuronKind::LIF, Activation::Identity, {0.0}, {0.5});
  CHECK(run(no_leak, {{0.4}, {0.4}}) == std::vector<double>{0, 0});

  auto quiet = layer(NeuronKind::LIF, Activation::Identity, {0.3, 0.9}, {0.2, 0.8});
  CHECK(run(quiet, {{0, 0}, {0, 0}, {0, 0}}) == std::vector<double>(6, 0.0));
}

TEST_CASE("VSN hand simulations") {
  auto l = layer(NeuronKind::VSN, Activation::Identity, {1.0}, {1.0});
  const auto out = run(l, {{0.5}, {0.6}});
  CHECK(out[0] == 0.0);
  CHECK(out[1] == doctest::Approx(0.6));

  const std::vector<std::vector<double>> z{{-1.5, 0.2, 3.0}, {0.7, -0.1, 2.0}};
  auto always = layer(NeuronKind::VSN, Activation::GeLU, {0.4, 0.9, 0.1}, {-1e9, -1e9, -1e9});
  auto never = layer(NeuronKind::VSN, Activation::GeLU, {0.4, 0.9, 0.1}, {1e9, 1e9, 1e9});
  const auto a = run(always, z);
  const auto n = run(never, z);
  for (std::size_t t = 0; t < 2; ++t)
    for (std::size_t i = 0; i < 3; ++i) {
      CHECK(a[t * 3 + i] == gelu(Tensor::scalar(z[t][i])).item());
      CHECK(n[t * 3 + i] == 0.0);
    }
}

TEST_CASE("artificial layer") {
  NeuronLayer gelu_layer(NeuronKind::Artificial, Activation::GeLU, {3}, false, {}, {});
  CHECK(gelu_layer.step(Tensor::zeros({3}))[1] == 0.0);
  NeuronLayer identity(NeuronKind::Artificial, Activation::Identity, {3}, false, {}, {});
  const Tensor z = Tensor::from({3}, {-2, 0.5, 4});
  const Tensor same = identity.step(z);
  CHECK(std::vector<double>(same.data().begin(), same.data().end()) == std::vector<double>{-2, 0.5, 4});

  auto vsn = layer(NeuronKind::VSN, Activation::GeLU, {0.5, 0.5, 0.5}, {-1e9, -1e9, -1e9});
  const Tensor a = gelu_layer.step(z);
  const Tensor v = vsn.step(z);
  for (std::size_t i = 0; i < 3; ++i) CHECK(std::abs(a[i] - v[i]) < 1e-12);
  CHECK(gelu_layer.spike_counter().possible == 0);
}

TEST_CASE("shape mismatch is rejected") {
  auto l = layer(NeuronKind::LIF, Activation::Identity, {1, 1}, {1, 1});
  CHECK_THROWS_AS(l.step(Tensor::zeros({3})), ShapeError);
  CHECK_THROWS_AS(l.vsn_step(Tensor::zeros({2})), std::logic_error);
}

TEST_CASE("reset_state") {
  auto l = layer(NeuronKind::LIF, Activation::Identity, {0.9, 0.8}, {5.0, 5.0});
  const std::vector<std::vector<double>> z{{1.0, 2.0}, {1.5, 0.5}};
  const auto first = run(l, z);
  double peak = 0.0;
  for (double m : l.membrane().data()) peak = std::max(peak, std::abs(m));
  CHECK(peak > 0.0);
  l.reset_state();
  for (double m : l.membrane().data()) CHECK(m == 0.0);
  CHECK(l.spike_counter().spikes == 0);
  CHECK(l.spike_counter().possible == 0);
  CHECK(run(l, z) == first);

  // Carried state: a second sequence without reset sees the old membrane.
  auto carry = layer(NeuronKind::LIF, Activation::Identity, {1.0}, {1.0});
  carry.reset_state();
  (void)carry.step(Tensor::from({1}, {0.6}));
  const double carried = carry.step(Tensor::from({1}, {0.6}))[0];
  carry.reset_state();
  const double fresh = carry.step(Tensor::from({1}, {0.6}))[0];
  CHECK(carried == 1.0);
  CHECK(fresh == 0.0);
}

TEST_CASE("property: LIF and VSN match a plain-loop recurrence exactly") {
  vswno::Rng rng(2024);
  for (int trial = 0; trial < 200; ++trial) {
    const double beta = rng.uniform(0, 1);
    const double threshold = rng.uniform(-0.5, 1.5);
    const std::size_t steps = 1 + rng.next() % 8;
    std::vector<double> z(steps);
    for (double& v : z) v = rng.uniform(-1, 1.5);
    const auto ref = oracle::lif_recurrence(beta, threshold, z);

    auto lif = layer(NeuronKind::LIF, Activation::Identity, {beta}, {threshold});
    auto vsn = layer(NeuronKind::VSN, Activation::Identity, {beta}, {threshold});
    lif.reset_state();
    vsn.reset_state();
    std::uint64_t fired = 0;
    for (std::size_t t = 0; t < steps; ++t) {
      CHECK(lif.step(Tensor::from({1}, {z[t]}))[0] == ref.spikes[t]);
      CHECK(vsn.step(Tensor::from({1}, {z[t]}))[0] == z[t] * ref.spikes[t]);
      fired += static_cast<std::uint64_t>(ref.spikes[t]);
    }
    CHECK(lif.membrane()[0] == ref.membrane);
    CHECK(lif.spike_counter().spikes == fired);
    CHECK(lif.spike_counter().possible == steps);
    CHECK(vsn.spike_counter().spikes == fired);
  }
}

TEST_CASE("property: degeneration bounds") {
  vswno::Rng rng(5);
  const double bound = 2.0;
  const std::size_t sts = 6;
  for (int trial = 0; trial < 50; ++trial) {
    const double beta = rng.uniform(0, 0.9);
    std::vector<std::vector<double>> z(sts, std::vector<double>(4));
    for (auto& step : z)
      for (double& v : step) v = rng.uniform(-bound, bound);
    const double low = -(beta * bound * static_cast<double>(sts) + bound) - 1e-9;
    const double high = bound * static_cast<double>(sts) / (1.0 - beta) + 1.0;
    auto on = layer(NeuronKind::VSN, Activation::GeLU, std::vector<double>(4, beta), std::vector<double>(4, low));
    auto off = layer(NeuronKind::VSN, Activation::GeLU, std::vector<double>(4, beta), std::vector<double>(4, high));
    const auto a = run(on, z);
    const auto b = run(off, z);
    for (std::size_t t = 0; t < sts; ++t)
      for (std::size_t i = 0; i < 4; ++i) {
        CHECK(a[t * 4 + i] == gelu(Tensor::scalar(z[t][i])).item());
        CHECK(b[t * 4 + i] == 0.0);
      }
    CHECK(on.spike_counter().spikes <= on.spike_counter().possible);
  }
}

TEST_CASE("gradients reach leakage and threshold") {
  auto l = layer(NeuronKind::VSN, Activation::Identity, {0.5, 0.5}, {0.1, 0.1}, true);
  Tape tape;
  {
    TapeScope scope(tape);
    l.reset_state();
    Tensor y1 = l.step(Tensor::from({2}, {0.05, 0.3}));
    Tensor y2 = l.step(Tensor::from({2}, {0.2, 0.2}));
    tape.backward(add(sum(y1), sum(y2)));
  }
  // Threshold enters with sign -1 through M - T.
  CHECK(l.threshold().grad()[0] < 0.0);
  bool any_beta = false;
  for (double g : l.beta().grad()) any_beta = any_beta || g != 0.0;
  CHECK(any_beta);
}

TEST_CASE("direct encoding") {
  const Tensor x = Tensor::from({1}, {0.2});
  const SpikeTrain one = encode_direct(x, 1);
  CHECK(one.sts == 1);
  CHECK(one.step(0)[0] == 0.2);
  const SpikeTrain three = encode_direct(x, 3);
  CHECK(three.values.shape() == Shape{3, 1});
  for (double v : three.values.data()) CHECK(v == 0.2);
  CHECK(reduce(three.values, ReduceOp::Mean, 0)[0] == 0.2);
  CHECK_THROWS_AS(encode_direct(x, 0), std::invalid_argument);
}

TEST_CASE("rate encoding") {
  const Tensor edges = Tensor::from({2}, {1.0, 0.0});
  const SpikeTrain t = encode_rate(edges, 10, 3);
  for (std::size_t s = 0; s < 10; ++s) {
    CHECK(t.step(s)[0] == 1.0);
    CHECK(t.step(s)[1] == 0.0);
  }
  const Tensor x = Tensor::full({10000}, 0.3);
  const SpikeTrain a = encode_rate(x, 10, 77);
  const SpikeTrain b = encode_rate(x, 10, 77);
  CHECK(std::equal(a.values.data().begin(), a.values.data().end(), b.values.data().begin()));
  double rate = 0.0;
  for (double v : a.values.data()) rate += v;
  rate /= static_cast<double>(a.values.size());
  CHECK(std::abs(rate - 0.3) <= 0.01);
  CHECK_THROWS_AS(encode_rate(x, 10, 1, {1.0, 1.0}), std::invalid_argument);
}

TEST_CASE("triangular encoding") {
  auto bits = [](double v, std::size_t sts) {
    const SpikeTrain t = encode_triangular(Tensor::from({1}, {v}), sts);
    return std::vector<double>(t.values.data().begin(), t.values.data().end());
  };
  CHECK(bits(0.7, 10) == std::vector<double>{1, 1, 1, 1, 1, 1, 1, 0, 0, 0});
  CHECK(bits(0.0, 10) == std::vector<double>(10, 0.0));
  CHECK(bits(1.0, 10) == std::vector<double>(10, 1.0));
  CHECK(bits(0.1234, 10) == std::vector<double>{1, 0, 0, 0, 0, 0, 0, 0, 0, 0});
  CHECK_THROWS_AS(encode_triangular(Tensor::from({1}, {0.5}), 0), std::invalid_argument);
}

TEST_CASE("names round-trip") {
  for (auto k : {NeuronKind::Artificial, NeuronKind::LIF, NeuronKind::VSN}) CHECK(parse_kind(kind_name(k)) == k);
  for (auto e : {Encoding::Direct, Encoding::Rate, Encoding::Triangular}) CHECK(parse_encoding(encoding_name(e)) == e);
  CHECK_THROWS_AS(parse_kind("hodgkin"), std::invalid_argument);
}

}  // TEST_SUITE
