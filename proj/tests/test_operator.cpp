#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "vswno/operator.hpp"

using namespace vswno;
using namespace vswno::wno;

namespace {

WnoConfig small_config(std::vector<std::size_t> grid, NeuronKind kind = NeuronKind::Artificial) {
  WnoConfig c;
  c.grid = std::move(grid);
  c.width = 4;
  c.hidden = 6;
  c.blocks = 3;
  c.wavelet = "db4";
  c.levels = 2;
  c.mode = c.grid.size() == 1 ? ExtensionMode::Periodic : ExtensionMode::Symmetric;
  c.neuron = kind;
  return c;
}

std::vector<double> copy(const Tensor& t) { return {t.data().begin(), t.data().end()}; }

void fill(Tensor t, double v) {
  for (double& x : t.mutable_data()) x = v;
}

/// dwt -> keep coarsest bands -> contract -> idwt -> + pointwise mix, written
/// directly against the wavelet module.
std::vector<double> block_oracle_1d(const std::vector<double>& u, std::size_t n, std::size_t width,
                                    const std::vector<double>& kernel, const std::vector<double>& mix,
                                    const wavelet::WaveletFilter& f, std::size_t levels, ExtensionMode mode) {
  std::vector<wavelet::WaveletCoefficients> per_channel;
  for (std::size_t c = 0; c < width; ++c) {
    std::vector<double> line(n);
    for (std::size_t p = 0; p < n; ++p) line[p] = u[p * width + c];
    per_channel.push_back(wavelet::dwt1d(line, f, levels, mode));
  }
  const std::size_t b = per_channel[0].approx.size();
  const std::size_t k = 2 * b;
  std::vector<double> out(n * width, 0.0);
  for (std::size_t o = 0; o < width; ++o) {
    auto coeffs = per_channel[0];
    std::fill(coeffs.approx.begin(), coeffs.approx.end(), 0.0);
    for (auto& level : coeffs.details) std::fill(level.bands[0].begin(), level.bands[0].end(), 0.0);
    for (std::size_t c = 0; c < width; ++c)
      for (std::size_t i = 0; i < b; ++i) {
        coeffs.approx[i] += kernel[(c * width + o) * k + i] * per_channel[c].approx[i];
        coeffs.details[0].bands[0][i] += kernel[(c * width + o) * k + b + i] * per_channel[c].details[0].bands[0][i];
      }
    const auto field = wavelet::idwt1d(coeffs, f);
    for (std::size_t p = 0; p < n; ++p) {
      double acc = field[p];
      for (std::size_t c = 0; c < width; ++c) acc += u[p * width + c] * mix[c * width + o];
      out[p * width + o] = acc;
    }
  }
  return out;
}

std::vector<double> block_oracle_2d(const std::vector<double>& u, std::size_t rows, std::size_t cols,
                                    std::size_t width, const std::vector<double>& kernel,
                                    const std::vector<double>& mix, const wavelet::WaveletFilter& f,
                                    std::size_t levels, ExtensionMode mode) {
  const std::size_t n = rows * cols;
  std::vector<wavelet::WaveletCoefficients> per_channel;
  for (std::size_t c = 0; c < width; ++c) {
    wavelet::Field2d field{rows, cols, std::vector<double>(n)};
    for (std::size_t p = 0; p < n; ++p) field.values[p] = u[p * width + c];
    per_channel.push_back(wavelet::dwt2d(field, f, levels, mode));
  }
  const std::size_t b = per_channel[0].approx.size();
  const std::size_t k = 4 * b;
  std::vector<double> out(n * width, 0.0);
  for (std::size_t o = 0; o < width; ++o) {
    auto coeffs = per_channel[0];
    std::fill(coeffs.approx.begin(), coeffs.approx.end(), 0.0);
    for (auto& level : coeffs.details)
      for (auto& band : level.bands) std::fill(band.begin(), band.end(), 0.0);
    for (std::size_t c = 0; c < width; ++c)
      for (std::size_t i = 0; i < b; ++i) {
        const double* r = kernel.data() + (c * width + o) * k;
        coeffs.approx[i] += r[i] * per_channel[c].approx[i];
        for (std::size_t band = 0; band < 3; ++band)
          coeffs.details[0].bands[band][i] += r[(band + 1) * b + i] * per_channel[c].details[0].bands[band][i];
      }
    const auto field = wavelet::idwt2d(coeffs, f);
    for (std::size_t p = 0; p < n; ++p) {
      double acc = field.values[p];
      for (std::size_t c = 0; c < width; ++c) acc += u[p * width + c] * mix[c * width + o];
      out[p * width + o] = acc;
    }
  }
  return out;
}

}  // namespace

TEST_SUITE("operator") {

TEST_CASE("append_grid") {
  const Tensor one = append_grid(Tensor::zeros({4, 1}));
  CHECK(one.shape() == Shape{4, 2});
  for (std::size_t i = 0; i < 4; ++i) CHECK(one[i * 2 + 1] == doctest::Approx(static_cast<double>(i) / 3.0));

  const Tensor two = append_grid(Tensor::from({2, 2, 1}, {5, 6, 7, 8}));
  CHECK(two.shape() == Shape{2, 2, 3});
  CHECK(copy(two) == std::vector<double>{5, 0, 0, 6, 0, 1, 7, 1, 0, 8, 1, 1});

  CHECK(append_grid(Tensor::zeros({3, 5, 2})).shape().back() == 4);
}

TEST_CASE("config validation") {
  WnoConfig c = small_config({64});
  CHECK_NOTHROW(c.validate());
  c.blocks = 0;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c = small_config({64});
  c.levels = 7;  // 64 -> 1 after six periodic halvings
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c = small_config({64});
  c.sts = 0;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
}

TEST_CASE("update block: kernel path off, identity mix") {
  WnoModel m(small_config({64}), 1);
  fill(m.blocks()[0].kernel, 0.0);
  auto mix = m.blocks()[0].mix.mutable_data();
  std::fill(mix.begin(), mix.end(), 0.0);
  for (std::size_t i = 0; i < 4; ++i) mix[i * 4 + i] = 1.0;
  const Tensor u = Tensor::from({64, 4}, oracle::random_vector(256, 3));
  CHECK(copy(m.update_block(u, 0)) == copy(u));
}

TEST_CASE("update block: identity kernel keeps constants") {
  for (auto grid : {std::vector<std::size_t>{64}, std::vector<std::size_t>{20, 24}}) {
    WnoModel m(small_config(grid), 2);
    const std::size_t k = m.plan().coefficient_count();
    auto kernel = m.blocks()[0].kernel.mutable_data();
    std::fill(kernel.begin(), kernel.end(), 0.0);
    for (std::size_t c = 0; c < 4; ++c)
      for (std::size_t i = 0; i < k; ++i) kernel[(c * 4 + c) * k + i] = 1.0;
    fill(m.blocks()[0].mix, 0.0);
    const std::size_t n = m.config().points();
    std::vector<double> u(n * 4);
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t c = 0; c < 4; ++c) u[p * 4 + c] = 0.5 + static_cast<double>(c);
    const auto out = copy(m.update_block(Tensor::from({n, 4}, u), 0));
    for (std::size_t i = 0; i < out.size(); ++i) CHECK(std::abs(out[i] - u[i]) < 1e-10);
  }
}

TEST_CASE("update block matches the compositional oracle") {
  {
    WnoModel m(small_config({64}), 3);
    const auto u = oracle::random_vector(64 * 4, 9);
    const auto got = copy(m.update_block(Tensor::from({64, 4}, u), 1));
    const auto want = block_oracle_1d(u, 64, 4, copy(m.blocks()[1].kernel), copy(m.blocks()[1].mix),
                                      wavelet::daubechies("db4"), 2, ExtensionMode::Periodic);
    for (std::size_t i = 0; i < got.size(); ++i) CHECK(std::abs(got[i] - want[i]) < 1e-12);
  }
  {
    WnoConfig c = small_config({43, 43});
    c.levels = 3;
    WnoModel m(c, 4);
    const auto u = oracle::random_vector(43 * 43 * 4, 10);
    const auto got = copy(m.update_block(Tensor::from({43 * 43, 4}, u), 0));
    const auto want = block_oracle_2d(u, 43, 43, 4, copy(m.blocks()[0].kernel), copy(m.blocks()[0].mix),
                                      wavelet::daubechies("db4"), 3, ExtensionMode::Symmetric);
    for (std::size_t i = 0; i < got.size(); ++i) CHECK(std::abs(got[i] - want[i]) < 1e-12);
  }
}

TEST_CASE("spectral plan adjoints pass the dot-product test") {
  for (auto grid : {std::vector<std::size_t>{96}, std::vector<std::size_t>{21, 30}}) {
    const SpectralPlan plan(grid, "db6", 2, grid.size() == 1 ? ExtensionMode::Periodic : ExtensionMode::Symmetric);
    const std::size_t n = plan.points();
    const std::size_t k = plan.coefficient_count();
    const auto x = oracle::random_vector(n, 1);
    const auto g = oracle::random_vector(k, 2);
    std::vector<double> c(k), xg(n, 0.0);
    plan.analyze(x, c);
    plan.analyze_adjoint(g, xg);
    double lhs = 0.0, rhs = 0.0;
    for (std::size_t i = 0; i < k; ++i) lhs += c[i] * g[i];
    for (std::size_t i = 0; i < n; ++i) rhs += x[i] * xg[i];
    CHECK(std::abs(lhs - rhs) < 1e-12);

    std::vector<double> y(n), cg(k, 0.0);
    plan.synthesize(g, y);
    plan.synthesize_adjoint(x, cg);
    lhs = rhs = 0.0;
    for (std::size_t i = 0; i < n; ++i) lhs += y[i] * x[i];
    for (std::size_t i = 0; i < k; ++i) rhs += g[i] * cg[i];
    CHECK(std::abs(lhs - rhs) < 1e-12);
  }
}

TEST_CASE("forward shape and zero parameters") {
  WnoModel m(small_config({64}), 5);
  const Tensor x = Tensor::from({64, 1}, oracle::random_vector(64, 5));
  CHECK(m.forward_single(x).shape() == Shape{64, 1});
  for (auto& [name, t] : m.named_tensors())
    if (name.rfind("site", 0) != 0) fill(t, 0.0);
  const Tensor y = m.forward_single(x);
  for (double v : y.data()) CHECK(v == 0.0);
  CHECK_THROWS_AS(m.forward_single(Tensor::zeros({32, 1})), ShapeError);
}

TEST_CASE("VSN with an unreachable threshold reproduces the artificial network") {
  WnoConfig a = small_config({64}, NeuronKind::Artificial);
  WnoConfig v = small_config({64}, NeuronKind::VSN);
  WnoModel art(a, 7);
  WnoModel vsn(v, 7);
  auto src = art.named_tensors();
  auto dst = vsn.named_tensors();
  for (std::size_t i = 0; i < src.size(); ++i) {
    REQUIRE(src[i].first == dst[i].first);
    std::copy(src[i].second.data().begin(), src[i].second.data().end(), dst[i].second.mutable_data().begin());
  }
  for (auto& site : vsn.sites()) fill(site.threshold(), -1e9);
  const Tensor x = Tensor::from({64, 1}, oracle::random_vector(64, 8));
  CHECK(copy(art.forward_single(x)) == copy(vsn.forward_single(x)));
}

TEST_CASE("multi-STS forward") {
  const Tensor x = Tensor::from({64, 1}, oracle::random_vector(64, 11));
  WnoModel art(small_config({64}), 12);
  CHECK(copy(art.forward_multi_sts(x, 1)) == copy(art.forward_single(x)));
  const auto one = copy(art.forward_single(x));
  const auto four = copy(art.forward_multi_sts(x, 4));
  for (std::size_t i = 0; i < one.size(); ++i) CHECK(std::abs(one[i] - four[i]) < 1e-14);

  WnoModel vsn(small_config({64}, NeuronKind::VSN), 13);
  CHECK(copy(vsn.forward_multi_sts(x, 1)) == copy(vsn.forward_single(x)));
}

TEST_CASE("LIF network fires late on the second step") {
  WnoModel lif(small_config({64}, NeuronKind::LIF), 14);
  for (auto& site : lif.sites()) {
    fill(site.beta(), 1.0);
    fill(site.threshold(), 0.05);
  }
  const Tensor x = Tensor::from({64, 1}, oracle::random_vector(64, 15));
  (void)lif.forward_multi_sts(x, 1);
  const auto first_step = lif.site_counters()[0].spikes;
  (void)lif.forward_multi_sts(x, 2);
  // Same input twice: units that fired reset and fire again, units with
  // z in (T/2, T] join on the second step.
  CHECK(lif.site_counters()[0].possible == 2 * 64 * 4);
  CHECK(lif.site_counters()[0].spikes > 2 * first_step);
}

TEST_CASE("parameter count and spike counters") {
  WnoModel art(small_config({64}, NeuronKind::Artificial), 1);
  WnoModel lif(small_config({64}, NeuronKind::LIF), 1);
  WnoModel vsn(small_config({64}, NeuronKind::VSN), 1);
  CHECK(art.parameter_count(false) == lif.parameter_count(false));
  CHECK(art.parameter_count(false) == vsn.parameter_count(false));
  CHECK(art.parameter_count(true) == art.parameter_count(false));
  // sites after blocks 1..L-1 are [64, width], the last is [64, hidden]
  CHECK(vsn.parameter_count(true) == vsn.parameter_count(false) + 2 * (2 * 64 * 4 + 64 * 6));

  const Tensor x = Tensor::from({64, 1}, oracle::random_vector(64, 2));
  (void)art.forward_single(x);
  for (const auto& c : art.site_counters()) CHECK(c.possible == 0);
  (void)vsn.forward_multi_sts(x, 3);
  REQUIRE(vsn.site_counters().size() == 3);
  CHECK(vsn.site_counters()[0].possible == 3 * 64 * 4);
  CHECK(vsn.site_counters()[2].possible == 3 * 64 * 6);
}

TEST_CASE("forward is deterministic and thread-safe without a tape") {
  WnoModel m(small_config({64}, NeuronKind::VSN), 21);
  const Tensor x = Tensor::from({64, 1}, oracle::random_vector(64, 22));
  WnoModel other = m;
  CHECK(copy(m.forward_single(x)) == copy(other.forward_single(x)));
}

TEST_CASE("property: smooth-path gradients match central differences") {
  WnoConfig c = small_config({32}, NeuronKind::VSN);
  c.blocks = 2;
  c.width = 3;
  c.hidden = 4;
  WnoModel m(c, 31);
  for (auto& site : m.sites()) fill(site.threshold(), -1e9);
  const Tensor x = Tensor::from({32, 1}, oracle::random_vector(32, 32));
  const Tensor y = Tensor::from({32, 1}, oracle::random_vector(32, 33));
  auto loss_tensor = [&] {
    Tensor d = sub(m.forward_single(x), y);
    return mean(mul(d, d));
  };
  Tape tape;
  {
    TapeScope scope(tape);
    tape.backward(loss_tensor());
  }
  auto loss = [&] { return loss_tensor().item(); };
  for (auto& [name, t] : m.named_tensors()) {
    if (name.rfind("site", 0) == 0) continue;
    CAPTURE(name);
    std::vector<double> analytic(t.grad().begin(), t.grad().end());
    CHECK(oracle::gradient_mismatch(analytic, oracle::central_difference(loss, t)) < 1e-5);
  }
}

}  // TEST_SUITE
