// Copyright 2026 The randcnn Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <algorithm>

#include "doctest.h"
#include "helpers.hpp"
#include "oracles/reference_values.hpp"
#include "randcnn/objectives.hpp"

using namespace randcnn;

namespace {

Tensor<double> oracle_input(double amp, double freq, double phase) {
  Tensor<double> t({3, 9, 7});
  for (std::size_t i = 0; i < t.size(); ++i) {
    t[i] = amp * (phase < 0 ? std::cos(freq * static_cast<double>(i))
                            : std::sin(freq * static_cast<double>(i) + phase));
  }
  return t;
}

ObjectiveConfig<double> oracle_config(const Network<double>& net) {
  const auto x0 = oracle_input(30.0, 0.05, 0.3);
  const auto cache = net.forward(x0, "conv2_1");
  ObjectiveConfig<double> cfg;
  cfg.content = ContentTarget<double>{"conv2_1", cache.at("conv2_1"), 0.5};
  cfg.style = StyleTarget<double>{{{"conv1_1", gram(cache.at("conv1_1")), 3.0}}};
  cfg.alpha = 1.0;
  cfg.beta = 2.0;
  cfg.gamma = 0.01;
  return cfg;
}

}  // namespace

TEST_CASE("content loss hand values") {
  const Tensor<double> f({1, 2}, std::vector<double>{2, 0});
  const auto r = content_loss_and_grad(f, ContentTarget<double>{"l", Tensor<double>({1, 2}), 1.0});
  CHECK(r.loss == oracle::kContentLoss);
  CHECK(r.grad[0] == oracle::kContentGrad0);
  CHECK(r.grad[1] == oracle::kContentGrad1);

  const auto same = content_loss_and_grad(f, ContentTarget<double>{"l", f, 1.0});
  CHECK(same.loss == 0.0);
  CHECK(max_abs(same.grad) == 0.0);
}

TEST_CASE("content loss is linear in omega") {
  const auto f = testing::random_tensor<double>({4, 3, 3}, 1, -1, 1);
  const auto f0 = testing::random_tensor<double>({4, 3, 3}, 2, -1, 1);
  const auto a = content_loss_and_grad(f, ContentTarget<double>{"l", f0, 0.7});
  const auto b = content_loss_and_grad(f, ContentTarget<double>{"l", f0, 7.0});
  CHECK(b.loss == doctest::Approx(10.0 * a.loss).epsilon(1e-14));
  CHECK(testing::rel_err(scale(a.grad, 10.0), b.grad) < 1e-14);
}

TEST_CASE("gram matrix hand values") {
  const Tensor<double> f({2, 2}, std::vector<double>{1, 2, 3, 4});
  const auto g = gram(f);
  CHECK(g.at(0, 0) == oracle::kGram00);
  CHECK(g.at(0, 1) == oracle::kGram01);
  CHECK(g.at(1, 0) == oracle::kGram01);
  CHECK(g.at(1, 1) == oracle::kGram11);
  const Tensor<double> eye({2, 2}, std::vector<double>{1, 0, 0, 1});
  CHECK(gram(eye) == eye);
}

TEST_CASE("gram matrix is symmetric positive semidefinite") {
  const auto f = testing::random_tensor<double>({6, 4, 5}, 3, -2, 2);
  const auto g = gram(f);
  for (std::size_t i = 0; i < 6; ++i) {
    for (std::size_t j = 0; j < 6; ++j) CHECK(g.at(i, j) == g.at(j, i));
  }
  Rng rng(4);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> v(6);
    for (auto& e : v) e = rng.uniform(-1, 1);
    double q = 0.0;
    for (std::size_t i = 0; i < 6; ++i) {
      for (std::size_t j = 0; j < 6; ++j) q += v[i] * g.at(i, j) * v[j];
    }
    CHECK(q >= -1e-9);
  }
}

TEST_CASE("texture loss hand values") {
  const Tensor<double> f({1, 1}, std::vector<double>{2});
  const auto r = texture_layer_loss_and_grad(f, Tensor<double>({1, 1}, 1.0), 1.0);
  CHECK(r.loss == oracle::kTextureLoss);
  CHECK(r.grad[0] == oracle::kTextureGrad);
  const auto f2 = testing::random_tensor<double>({3, 4}, 5, -1, 1);
  const auto matched = texture_layer_loss_and_grad(f2, gram(f2), 1.0);
  CHECK(matched.loss == doctest::Approx(0.0));
  CHECK(max_abs(matched.grad) < 1e-15);
}

TEST_CASE("texture gradient matches finite differences") {
  const auto f = testing::random_tensor<double>({8, 10}, 6, -1, 1);
  const auto g0 = gram(testing::random_tensor<double>({8, 10}, 7, -1, 1));
  const auto r = texture_layer_loss_and_grad(f, g0, 1.3);
  const auto numeric = testing::numeric_grad(
      [&](const Tensor<double>& x) { return texture_layer_loss_and_grad(x, g0, 1.3).loss; },
      f, 1e-5);
  CHECK(testing::rel_err(r.grad, numeric) < 1e-6);
}

TEST_CASE("asymmetric gram targets are rejected") {
  Tensor<double> g0({2, 2}, std::vector<double>{1, 2, 3, 4});
  CHECK_THROWS_AS(texture_layer_loss_and_grad(Tensor<double>({2, 3}), g0, 1.0), Error);
}

TEST_CASE("total variation hand values") {
  const Tensor<double> x({1, 2, 2}, std::vector<double>{0, 1, 2, 3});
  const auto r = tv_loss_and_grad(x);
  CHECK(r.loss == oracle::kTvLoss);
  CHECK(r.grad[0] == oracle::kTvGrad00);
  const auto flat = tv_loss_and_grad(Tensor<double>({3, 4, 4}, 7.0));
  CHECK(flat.loss == 0.0);
  CHECK(max_abs(flat.grad) == 0.0);
}

TEST_CASE("total variation gradient matches finite differences") {
  const auto x = testing::random_tensor<double>({3, 4, 4}, 8, -3, 3);
  const auto numeric = testing::numeric_grad(
      [](const Tensor<double>& t) { return tv_loss_and_grad(t).loss; }, x, 1e-4);
  CHECK(testing::rel_err(tv_loss_and_grad(x).grad, numeric) < 1e-6);
}

TEST_CASE("combined objective agrees with an autograd reference network") {
  Network<double> net(testing::two_conv_spec(), testing::two_conv_weights());
  const auto cfg = oracle_config(net);
  const auto r = style_objective(oracle_input(20.0, 0.11, -1.0), cfg, net);
  CHECK(r.loss == doctest::Approx(oracle::kNetLoss).epsilon(1e-10));
  CHECK(r.grad[0] == doctest::Approx(oracle::kNetGrad0).epsilon(1e-9));
  CHECK(r.grad[17] == doctest::Approx(oracle::kNetGrad17).epsilon(1e-9));
  CHECK(r.grad[100] == doctest::Approx(oracle::kNetGrad100).epsilon(1e-9));
  double abs_sum = 0.0;
  for (double v : r.grad.values()) abs_sum += std::abs(v);
  CHECK(abs_sum == doctest::Approx(oracle::kNetGradSumAbs).epsilon(1e-10));
}

TEST_CASE("combined objective gradient matches finite differences") {
  Network<double> net(testing::two_conv_spec(), testing::two_conv_weights());
  const auto cfg = oracle_config(net);
  const auto x = testing::random_tensor<double>({3, 9, 7}, 9, -20, 20);
  const auto numeric = testing::numeric_grad(
      [&](const Tensor<double>& t) { return style_objective(t, cfg, net).loss; }, x, 1e-4);
  CHECK(testing::rel_err(style_objective(x, cfg, net).grad, numeric) < 1e-6);
}

TEST_CASE("objective degenerates to single terms") {
  Network<double> net(testing::two_conv_spec(), testing::two_conv_weights());
  auto cfg = oracle_config(net);
  const auto x = testing::random_tensor<double>({3, 9, 7}, 10, -20, 20);
  const auto cache = net.forward(x, "conv2_1");

  auto content_only = cfg;
  content_only.beta = 0.0;
  content_only.gamma = 0.0;
  const auto c = content_loss_and_grad(cache.at("conv2_1"), *cfg.content);
  const auto rc = style_objective(x, content_only, net);
  CHECK(rc.loss == doctest::Approx(cfg.alpha * c.loss).epsilon(1e-14));
  const auto gc = net.backward_to_input(cache, {{"conv2_1", scale(c.grad, cfg.alpha)}});
  CHECK(testing::rel_err(rc.grad, gc) < 1e-14);

  auto texture_only = cfg;
  texture_only.alpha = 0.0;
  texture_only.gamma = 0.0;
  const auto& sl = cfg.style->layers[0];
  const auto t = texture_layer_loss_and_grad(cache.at(sl.layer), sl.gram, sl.mu);
  const auto rt = style_objective(x, texture_only, net);
  CHECK(rt.loss == doctest::Approx(cfg.beta * t.loss).epsilon(1e-14));
  const auto gt = net.backward_to_input(cache, {{sl.layer, scale(t.grad, cfg.beta)}});
  CHECK(testing::rel_err(rt.grad, gt) < 1e-14);

  ObjectiveTerms terms;
  style_objective(x, cfg, net, &terms);
  CHECK(terms.content == doctest::Approx(c.loss));
  CHECK(terms.texture == doctest::Approx(t.loss));
  CHECK(terms.tv == doctest::Approx(tv_loss_and_grad(x).loss));
}

TEST_CASE("texture loss ignores spatial permutations") {
  const auto f = testing::random_tensor<double>({4, 3, 4}, 11, 0, 2);
  Tensor<double> shuffled = f;
  std::vector<std::size_t> perm(12);
  for (std::size_t i = 0; i < 12; ++i) perm[i] = (i * 5) % 12;
  for (std::size_t c = 0; c < 4; ++c) {
    for (std::size_t k = 0; k < 12; ++k) shuffled[c * 12 + k] = f[c * 12 + perm[k]];
  }
  const auto g0 = gram(testing::random_tensor<double>({4, 3, 4}, 12, 0, 2));
  CHECK(texture_layer_loss_and_grad(f, g0, 1.0).loss ==
        doctest::Approx(texture_layer_loss_and_grad(shuffled, g0, 1.0).loss).epsilon(1e-12));
}

TEST_CASE("normalization weights on a single centre tap") {
  Network<double> net(testing::center_tap_spec(), testing::center_tap_weights(2.0f));
  const Tensor<double> x0({1, 1, 1}, 3.0);
  const double omega = compute_content_weight(net, x0, "conv1_1");
  CHECK(omega == doctest::Approx(oracle::kOmega).epsilon(1e-14));
  const double mu = compute_texture_weight(net, x0, "conv1_1");
  CHECK(mu == doctest::Approx(oracle::kMu).epsilon(1e-14));

  const auto cache = net.forward(x0, "conv1_1");
  CHECK(content_probe_gradient(net, cache, "conv1_1", 1.0)[0] == doctest::Approx(-12.0));
  CHECK(texture_probe_gradient(net, cache, "conv1_1", 1.0)[0] == doctest::Approx(432.0));
  CHECK(mean_abs(content_probe_gradient(net, cache, "conv1_1", omega)) ==
        doctest::Approx(1.0).epsilon(1e-12));
  CHECK(mean_abs(texture_probe_gradient(net, cache, "conv1_1", mu)) ==
        doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("texture weight shrinks as the activation grows") {
  NetworkSpec spec;
  spec.layers = {conv_layer("conv1_1", 3, 4)};
  WeightSet ws;
  ws.layers.push_back({"conv1_1", testing::sine_tensor({4, 3, 3, 3}, 0.3, 0.37, 0.1),
                       Tensor<float>({4})});
  Network<double> net(spec, ws);
  const auto x0 = testing::random_tensor<double>({3, 6, 6}, 13, -1, 1);
  double prev = std::numeric_limits<double>::infinity();
  for (double s : {0.5, 1.0, 2.0, 4.0}) {
    const double mu = compute_texture_weight(net, scale(x0, s), "conv1_1");
    CHECK(mu < prev);
    prev = mu;
  }
}

TEST_CASE("dead layers cannot be normalized") {
  Network<double> net(testing::center_tap_spec(), testing::center_tap_weights(2.0f));
  const Tensor<double> x0({1, 1, 1}, -3.0);
  try {
    compute_content_weight(net, x0, "conv1_1");
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kUnnormalizableLayer);
  }
}

TEST_CASE("objective config validation") {
  ObjectiveConfig<double> cfg;
  CHECK_THROWS_AS(cfg.validate(), Error);
  cfg.content = ContentTarget<double>{"conv1_1", Tensor<double>({1, 1, 1}), 1.0};
  CHECK_NOTHROW(cfg.validate());
  cfg.alpha = -1.0;
  CHECK_THROWS_AS(cfg.validate(), Error);
  cfg.alpha = 1.0;
  cfg.content->omega = 0.0;
  CHECK_THROWS_AS(cfg.validate(), Error);
}
