#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "tonerec/model.hpp"
#include "tonerec/nn.hpp"
#include "tonerec/rng.hpp"

using namespace tonerec;

namespace {

TensorD random_tensor(std::vector<int> shape, Rng& rng, double lo = -1.0, double hi = 1.0) {
  TensorD t(std::move(shape));
  for (double& v : t.values) v = rng.uniform(lo, hi);
  return t;
}

Conv2d<double> random_conv(int out_ch, int in_ch, Rng& rng) {
  Conv2d<double> conv = Conv2d<double>::make(out_ch, in_ch);
  for (double& v : conv.kernels.values) v = rng.uniform(-0.3, 0.3);
  for (double& v : conv.bias.values) v = rng.uniform(-0.3, 0.3);
  return conv;
}

GruCell<double> random_gru(int input_dim, int hidden, Rng& rng) {
  GruCell<double> cell = GruCell<double>::make(input_dim, hidden);
  for (TensorD* t : {&cell.w_z, &cell.u_z, &cell.b_z, &cell.w_r, &cell.u_r, &cell.b_r,
                     &cell.w_h, &cell.u_h, &cell.b_h}) {
    for (double& v : t->values) v = rng.uniform(-0.5, 0.5);
  }
  return cell;
}

double projected(const TensorD& t, const TensorD& proj) {
  double sum = 0.0;
  for (size_t i = 0; i < t.values.size(); ++i) sum += t.values[i] * proj.values[i];
  return sum;
}

}  // namespace

TEST_CASE("shape chain helpers") {
  CHECK(conv_output_len(11) == 1);
  CHECK(conv_output_len(10) == -1);
  CHECK(pool_output_len(4) == 1);
  CHECK(pool_output_len(3) == -1);

  // the quefrency chain the default model sees: 256 -> 246 -> 122 -> 112 -> 55 -> 45 -> 21
  CHECK(conv_stack_steps(256) == 21);
  CHECK(conv_stack_steps(98) == 1);
  CHECK(conv_stack_steps(91) == -1);
  CHECK(min_frames_for_steps(1) == 92);

  // adding one full stride of input adds exactly one output step
  int prev = conv_stack_steps(92);
  for (int w = 93; w <= 500; ++w) {
    const int cur = conv_stack_steps(w);
    CHECK(cur >= prev);
    if (w >= 100) CHECK(cur == conv_stack_steps(w - 8) + 1);
    prev = cur;
  }
}

TEST_CASE("conv2d: delta kernel extracts the central region") {
  Rng rng(1);
  TensorD x = random_tensor({1, 15, 16}, rng);
  Conv2d<double> conv = Conv2d<double>::make(1, 1);
  conv.kernels(0, 0, 5, 5) = 1.0;  // center of the 11x11 kernel
  TensorD y = conv2d_forward(x, conv);
  REQUIRE(y.dim(1) == 5);
  REQUIRE(y.dim(2) == 6);
  for (int i = 0; i < 5; ++i) {
    for (int j = 0; j < 6; ++j) {
      CHECK(y(0, i, j) == doctest::Approx(x(0, i + 5, j + 5)).epsilon(1e-12));
    }
  }
}

TEST_CASE("conv2d: zero input leaves only the bias") {
  TensorD x({2, 12, 12});
  Conv2d<double> conv = Conv2d<double>::make(3, 2);
  Rng rng(2);
  for (double& v : conv.kernels.values) v = rng.uniform(-1.0, 1.0);
  conv.bias(0) = 0.5;
  conv.bias(1) = -1.25;
  conv.bias(2) = 3.0;
  TensorD y = conv2d_forward(x, conv);
  for (int c = 0; c < 3; ++c) {
    for (int i = 0; i < y.dim(1); ++i) {
      for (int j = 0; j < y.dim(2); ++j) {
        CHECK(y(c, i, j) == conv.bias(c));
      }
    }
  }
}

TEST_CASE("conv2d matches the loop-nest oracle") {
  Rng rng(3);
  TensorD x = random_tensor({1, 13, 13}, rng);
  Conv2d<double> conv = random_conv(2, 1, rng);
  TensorD fast = conv2d_forward(x, conv);
  TensorD slow = oracle::loop_conv2d(x, conv.kernels, conv.bias);
  REQUIRE(fast.shape == slow.shape);
  for (size_t i = 0; i < fast.values.size(); ++i) {
    CHECK(fast.values[i] == doctest::Approx(slow.values[i]).epsilon(1e-10));
  }

  TensorD x2 = random_tensor({3, 18, 14}, rng);
  Conv2d<double> conv2 = random_conv(4, 3, rng);
  TensorD fast2 = conv2d_forward(x2, conv2);
  TensorD slow2 = oracle::loop_conv2d(x2, conv2.kernels, conv2.bias);
  for (size_t i = 0; i < fast2.values.size(); ++i) {
    CHECK(fast2.values[i] == doctest::Approx(slow2.values[i]).epsilon(1e-10));
  }
}

TEST_CASE("conv2d rejects undersized input") {
  Conv2d<double> conv = Conv2d<double>::make(1, 1);
  TensorD x({1, 10, 30});
  CHECK_THROWS_WITH(conv2d_forward(x, conv), "input too small");
}

TEST_CASE("conv2d translation covariance") {
  Rng rng(4);
  const int dy = 2;
  const int dx = 3;
  TensorD x = random_tensor({1, 20, 20}, rng);
  TensorD shifted = random_tensor({1, 20, 20}, rng);
  for (int y = dy; y < 20; ++y) {
    for (int xx = dx; xx < 20; ++xx) {
      shifted(0, y, xx) = x(0, y - dy, xx - dx);
    }
  }
  Conv2d<double> conv = random_conv(2, 1, rng);
  TensorD a = conv2d_forward(x, conv);
  TensorD b = conv2d_forward(shifted, conv);
  for (int c = 0; c < 2; ++c) {
    for (int oy = dy; oy < a.dim(1); ++oy) {
      for (int ox = dx; ox < a.dim(2); ++ox) {
        CHECK(b(c, oy, ox) == doctest::Approx(a(c, oy - dy, ox - dx)).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("conv2d backward matches finite differences") {
  Rng rng(5);
  TensorD x = random_tensor({2, 13, 14}, rng);
  Conv2d<double> conv = random_conv(2, 2, rng);
  TensorD proj = random_tensor({2, 3, 4}, rng);

  auto loss = [&] { return projected(conv2d_forward(x, conv), proj); };

  Conv2d<double> grads = Conv2d<double>::make(2, 2);
  TensorD dx;
  conv2d_backward(x, conv, proj, grads, &dx);

  std::vector<double*> params;
  std::vector<double> analytic;
  for (size_t i = 0; i < conv.kernels.values.size(); ++i) {
    params.push_back(&conv.kernels.values[i]);
    analytic.push_back(grads.kernels.values[i]);
  }
  for (size_t i = 0; i < conv.bias.values.size(); ++i) {
    params.push_back(&conv.bias.values[i]);
    analytic.push_back(grads.bias.values[i]);
  }
  for (size_t i = 0; i < x.values.size(); ++i) {
    params.push_back(&x.values[i]);
    analytic.push_back(dx.values[i]);
  }
  CHECK(oracle::max_grad_mismatch(params, analytic, loss) < 1e-4);
}

TEST_CASE("maxpool forward examples and oracle") {
  TensorD constant({1, 6, 6});
  constant.fill(2.5);
  MaxPoolCache cache;
  TensorD y = maxpool_forward(constant, &cache);
  REQUIRE(y.shape == std::vector<int>{1, 2, 2});
  for (double v : y.values) CHECK(v == 2.5);

  TensorD tiny({1, 4, 4});
  tiny.fill(-1.0);
  tiny(0, 2, 1) = 7.0;
  TensorD m = maxpool_forward<double>(tiny, nullptr);
  REQUIRE(m.shape == std::vector<int>{1, 1, 1});
  CHECK(m(0, 0, 0) == 7.0);

  Rng rng(6);
  TensorD x = random_tensor({1, 10, 10}, rng);
  TensorD fast = maxpool_forward<double>(x, nullptr);
  TensorD slow = oracle::loop_maxpool(x, kPoolWindow, kPoolStride);
  REQUIRE(fast.shape == std::vector<int>{1, 4, 4});
  CHECK(fast.values == slow.values);

  double input_max = x.values[0];
  for (double v : x.values) input_max = std::max(input_max, v);
  for (double v : fast.values) CHECK(v <= input_max);

  TensorD small({1, 3, 8});
  CHECK_THROWS_WITH(maxpool_forward<double>(small, nullptr), "input too small");
}

TEST_CASE("maxpool backward matches finite differences at unique argmax points") {
  Rng rng(7);
  TensorD x = random_tensor({2, 8, 8}, rng);
  // spread the values so no window has near-ties
  for (size_t i = 0; i < x.values.size(); ++i) x.values[i] += 1e-3 * static_cast<double>(i);

  MaxPoolCache cache;
  TensorD y = maxpool_forward(x, &cache);
  TensorD proj = random_tensor(y.shape, rng);
  TensorD dx = maxpool_backward<double>(cache, proj);

  auto loss = [&] { return projected(maxpool_forward<double>(x, nullptr), proj); };
  std::vector<double*> params;
  std::vector<double> analytic;
  for (size_t i = 0; i < x.values.size(); ++i) {
    params.push_back(&x.values[i]);
    analytic.push_back(dx.values[i]);
  }
  CHECK(oracle::max_grad_mismatch(params, analytic, loss, 1e-5) < 1e-4);
}

TEST_CASE("relu and dropout basics") {
  TensorD x({3});
  x.values = {-1.0, 0.0, 2.0};
  TensorD y = relu(x);
  CHECK(y.values == std::vector<double>{0.0, 0.0, 2.0});

  Rng rng(8);
  TensorD input({5});
  input.values = {1.0, -2.0, 3.0, -4.0, 5.0};
  TensorD mask;
  TensorD same = dropout(input, 0.0, true, rng, &mask);
  CHECK(same.values == input.values);
  TensorD eval_out = dropout(input, 0.5, false, rng, &mask);
  CHECK(eval_out.values == input.values);

  CHECK_THROWS(dropout(input, 1.0, true, rng, &mask));
}

TEST_CASE("dropout keeps the mean at rate 0.5") {
  Rng rng(9);
  TensorD ones({100000});
  ones.fill(1.0);
  TensorD mask;
  TensorD out = dropout(ones, 0.5, true, rng, &mask);
  double mean = 0.0;
  int zeros = 0;
  for (double v : out.values) {
    mean += v;
    if (v == 0.0) ++zeros;
  }
  mean /= static_cast<double>(out.values.size());
  CHECK(mean > 0.98);
  CHECK(mean < 1.02);
  CHECK(zeros > 45000);  // roughly half dropped
  // survivors carry the inverted scale
  for (double v : out.values) CHECK((v == 0.0 || v == 2.0));
}

TEST_CASE("dropout backward uses the forward mask") {
  Rng rng(10);
  TensorD x = random_tensor({50}, rng);
  TensorD mask;
  dropout(x, 0.5, true, rng, &mask);
  TensorD dy = random_tensor({50}, rng);
  TensorD dx = dropout_backward(mask, dy);
  for (int i = 0; i < 50; ++i) {
    CHECK(dx(i) == doctest::Approx(dy(i) * mask(i)).epsilon(1e-12));
  }
}

TEST_CASE("affine backward matches finite differences") {
  Rng rng(11);
  TensorD x = random_tensor({3, 5}, rng);
  Affine<double> layer = Affine<double>::make(4, 5);
  for (double& v : layer.weight.values) v = rng.uniform(-0.5, 0.5);
  for (double& v : layer.bias.values) v = rng.uniform(-0.5, 0.5);
  TensorD proj = random_tensor({3, 4}, rng);

  auto loss = [&] { return projected(affine_forward(x, layer), proj); };
  Affine<double> grads = Affine<double>::make(4, 5);
  TensorD dx;
  affine_backward(x, layer, proj, grads, &dx);

  std::vector<double*> params;
  std::vector<double> analytic;
  for (size_t i = 0; i < layer.weight.values.size(); ++i) {
    params.push_back(&layer.weight.values[i]);
    analytic.push_back(grads.weight.values[i]);
  }
  for (size_t i = 0; i < layer.bias.values.size(); ++i) {
    params.push_back(&layer.bias.values[i]);
    analytic.push_back(grads.bias.values[i]);
  }
  for (size_t i = 0; i < x.values.size(); ++i) {
    params.push_back(&x.values[i]);
    analytic.push_back(dx.values[i]);
  }
  CHECK(oracle::max_grad_mismatch(params, analytic, loss) < 1e-4);
}

TEST_CASE("gru: zero weights give the zero fixed point") {
  GruCell<double> cell = GruCell<double>::make(3, 4);
  TensorD inputs = TensorD({5, 3});
  Rng rng(12);
  for (double& v : inputs.values) v = rng.uniform(-1.0, 1.0);
  TensorD h0({4});
  GruCache<double> cache;
  TensorD h = gru_forward(cell, inputs, h0, &cache);
  for (double v : h.values) CHECK(v == 0.0);
  for (double v : cache.z.values) CHECK(v == 0.5);
  for (double v : cache.r.values) CHECK(v == 0.5);
  for (double v : cache.hc.values) CHECK(v == 0.0);
}

TEST_CASE("gru single step matches the recurrence evaluated by hand") {
  GruCell<double> cell = GruCell<double>::make(1, 1);
  cell.w_z(0, 0) = 0.5;
  cell.u_z(0, 0) = 0.3;
  cell.b_z(0) = 0.1;
  cell.w_r(0, 0) = -0.4;
  cell.u_r(0, 0) = 0.2;
  cell.b_r(0) = 0.05;
  cell.w_h(0, 0) = 0.9;
  cell.u_h(0, 0) = -0.6;
  cell.b_h(0) = 0.0;

  TensorD x({1, 1});
  x(0, 0) = 0.7;
  TensorD h0({1});
  h0(0) = 0.2;

  auto sig = [](double v) { return 1.0 / (1.0 + std::exp(-v)); };
  const double z = sig(0.5 * 0.7 + 0.3 * 0.2 + 0.1);
  const double r = sig(-0.4 * 0.7 + 0.2 * 0.2 + 0.05);
  const double hc = std::tanh(0.9 * 0.7 + (-0.6) * (r * 0.2) + 0.0);
  const double expected = (1.0 - z) * 0.2 + z * hc;

  TensorD h = gru_forward<double>(cell, x, h0, nullptr);
  CHECK(h(0, 0) == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("gru is causal") {
  Rng rng(13);
  GruCell<double> cell = random_gru(3, 4, rng);
  TensorD inputs = random_tensor({6, 3}, rng);
  TensorD h0({4});
  TensorD base = gru_forward<double>(cell, inputs, h0, nullptr);

  TensorD modified = inputs;
  for (int t = 4; t < 6; ++t) {
    for (int d = 0; d < 3; ++d) modified(t, d) = rng.uniform(-1.0, 1.0);
  }
  TensorD changed = gru_forward<double>(cell, modified, h0, nullptr);
  for (int t = 0; t < 4; ++t) {
    for (int i = 0; i < 4; ++i) CHECK(changed(t, i) == base(t, i));
  }
}

TEST_CASE("gru backward matches finite differences") {
  Rng rng(14);
  GruCell<double> cell = random_gru(3, 4, rng);
  TensorD inputs = random_tensor({5, 3}, rng);
  TensorD h0({4});
  TensorD proj = random_tensor({5, 4}, rng);

  auto loss = [&] { return projected(gru_forward<double>(cell, inputs, h0, nullptr), proj); };

  GruCache<double> cache;
  gru_forward(cell, inputs, h0, &cache);
  GruCell<double> grads = GruCell<double>::make(3, 4);
  TensorD dinputs;
  gru_backward(cell, inputs, h0, cache, proj, grads, &dinputs);

  std::vector<double*> params;
  std::vector<double> analytic;
  auto add = [&params, &analytic](TensorD& p, const TensorD& g) {
    for (size_t i = 0; i < p.values.size(); ++i) {
      params.push_back(&p.values[i]);
      analytic.push_back(g.values[i]);
    }
  };
  add(cell.w_z, grads.w_z);
  add(cell.u_z, grads.u_z);
  add(cell.b_z, grads.b_z);
  add(cell.w_r, grads.w_r);
  add(cell.u_r, grads.u_r);
  add(cell.b_r, grads.b_r);
  add(cell.w_h, grads.w_h);
  add(cell.u_h, grads.u_h);
  add(cell.b_h, grads.b_h);
  add(inputs, dinputs);
  CHECK(oracle::max_grad_mismatch(params, analytic, loss) < 1e-4);
}

TEST_CASE("bigru forward structure") {
  Rng rng(15);
  GruCell<double> fwd = random_gru(3, 2, rng);
  GruCell<double> bwd = random_gru(3, 2, rng);

  // T = 1: both directions see the same single input
  TensorD one = random_tensor({1, 3}, rng);
  TensorD h0({2});
  TensorD out = bigru_forward<double>(fwd, bwd, one, nullptr);
  TensorD f = gru_forward<double>(fwd, one, h0, nullptr);
  TensorD b = gru_forward<double>(bwd, one, h0, nullptr);
  for (int i = 0; i < 2; ++i) {
    CHECK(out(0, i) == f(0, i));
    CHECK(out(0, i + 2) == b(0, i));
  }

  // palindromic input with shared cells: reversing time swaps the halves
  TensorD pal({4, 3});
  for (int d = 0; d < 3; ++d) {
    pal(0, d) = pal(3, d) = 0.3 + 0.1 * d;
    pal(1, d) = pal(2, d) = -0.2 + 0.05 * d;
  }
  TensorD pout = bigru_forward<double>(fwd, fwd, pal, nullptr);
  for (int t = 0; t < 4; ++t) {
    for (int i = 0; i < 2; ++i) {
      CHECK(pout(t, i) == doctest::Approx(pout(3 - t, i + 2)).epsilon(1e-12));
    }
  }

  // compositional oracle: explicit reversal around a plain gru
  TensorD seq = random_tensor({5, 3}, rng);
  TensorD big = bigru_forward<double>(fwd, bwd, seq, nullptr);
  TensorD rev({5, 3});
  for (int t = 0; t < 5; ++t) {
    for (int d = 0; d < 3; ++d) rev(t, d) = seq(4 - t, d);
  }
  TensorD ffwd = gru_forward<double>(fwd, seq, h0, nullptr);
  TensorD fbwd = gru_forward<double>(bwd, rev, h0, nullptr);
  for (int t = 0; t < 5; ++t) {
    for (int i = 0; i < 2; ++i) {
      CHECK(big(t, i) == ffwd(t, i));
      CHECK(big(t, i + 2) == fbwd(4 - t, i));
    }
  }
}

TEST_CASE("bigru backward matches finite differences") {
  Rng rng(16);
  GruCell<double> fwd = random_gru(2, 3, rng);
  GruCell<double> bwd = random_gru(2, 3, rng);
  TensorD inputs = random_tensor({4, 2}, rng);
  TensorD proj = random_tensor({4, 6}, rng);

  auto loss = [&] { return projected(bigru_forward<double>(fwd, bwd, inputs, nullptr), proj); };

  BiGruCache<double> cache;
  bigru_forward(fwd, bwd, inputs, &cache);
  GruCell<double> gf = GruCell<double>::make(2, 3);
  GruCell<double> gb = GruCell<double>::make(2, 3);
  TensorD dinputs;
  bigru_backward(fwd, bwd, inputs, cache, proj, gf, gb, &dinputs);

  std::vector<double*> params;
  std::vector<double> analytic;
  auto add = [&params, &analytic](TensorD& p, const TensorD& g) {
    for (size_t i = 0; i < p.values.size(); ++i) {
      params.push_back(&p.values[i]);
      analytic.push_back(g.values[i]);
    }
  };
  add(fwd.w_z, gf.w_z);
  add(fwd.u_h, gf.u_h);
  add(fwd.b_r, gf.b_r);
  add(bwd.w_h, gb.w_h);
  add(bwd.u_z, gb.u_z);
  add(bwd.b_h, gb.b_h);
  add(inputs, dinputs);
  CHECK(oracle::max_grad_mismatch(params, analytic, loss) < 1e-4);
}

TEST_CASE("stack_features layout") {
  // C = 1, H = 1: plain reshape
  TensorD flat({1, 1, 4});
  flat.values = {1.0, 2.0, 3.0, 4.0};
  TensorD stacked = stack_features(flat);
  REQUIRE(stacked.shape == std::vector<int>{4, 1});
  CHECK(stacked.values == flat.values);

  Rng rng(17);
  TensorD x = random_tensor({3, 2, 5}, rng);
  TensorD s = stack_features(x);
  REQUIRE(s.shape == std::vector<int>{5, 6});
  for (int c = 0; c < 3; ++c) {
    for (int h = 0; h < 2; ++h) {
      for (int t = 0; t < 5; ++t) {
        CHECK(s(t, c * 2 + h) == x(c, h, t));
      }
    }
  }

  // permuting channels permutes the stacked blocks
  TensorD perm({3, 2, 5});
  const int order[3] = {2, 0, 1};
  for (int c = 0; c < 3; ++c) {
    for (int h = 0; h < 2; ++h) {
      for (int t = 0; t < 5; ++t) perm(c, h, t) = x(order[c], h, t);
    }
  }
  TensorD ps = stack_features(perm);
  for (int c = 0; c < 3; ++c) {
    for (int h = 0; h < 2; ++h) {
      for (int t = 0; t < 5; ++t) {
        CHECK(ps(t, c * 2 + h) == s(t, order[c] * 2 + h));
      }
    }
  }
}

namespace {

Cepstrogram random_features(int frames, int bins, Rng& rng) {
  Cepstrogram gram;
  gram.num_frames = frames;
  gram.num_bins = bins;
  gram.frame_hop_s = 0.01;
  gram.data.resize(static_cast<size_t>(frames) * bins);
  for (float& v : gram.data) v = static_cast<float>(rng.uniform(-1.0, 1.0));
  return gram;
}

}  // namespace

TEST_CASE("model forward contract") {
  Rng rng(18);
  ModelConfig cfg;
  cfg.conv_channels = 2;
  cfg.hidden = 3;
  ToneNet<float> model = ToneNet<float>::init(cfg, 92, 99);

  Cepstrogram feat = random_features(100, 92, rng);
  Tensor a = model.forward(feat, false, nullptr, nullptr);
  CHECK(a.dim(1) == 6);
  CHECK(a.dim(0) == conv_stack_steps(100));

  // eval mode is bitwise deterministic
  Tensor b = model.forward(feat, false, nullptr, nullptr);
  CHECK(a.values == b.values);

  Cepstrogram tiny = random_features(91, 92, rng);
  CHECK_THROWS_WITH(model.forward(tiny, false, nullptr, nullptr),
                    "utterance too short for receptive field");
}

TEST_CASE("full model backward matches finite differences on a tiny model") {
  ModelConfig cfg;
  cfg.conv_channels = 2;
  cfg.hidden = 3;
  ToneNet<float> seed_model = ToneNet<float>::init(cfg, 92, 7);
  ToneNet<double> model = convert_model<double>(seed_model);

  Rng rng(19);
  Cepstrogram feat = random_features(92, 92, rng);
  TensorD proj;

  auto loss = [&] {
    TensorD logits = model.forward(feat, false, nullptr, nullptr);
    return projected(logits, proj);
  };

  ModelCache<double> cache;
  TensorD logits = model.forward(feat, false, nullptr, &cache);
  proj = random_tensor(logits.shape, rng);
  ModelParams<double> grads = zeros_like(model.params);
  model.backward(cache, proj, grads);

  std::vector<double*> params;
  std::vector<double> analytic;
  auto model_tensors = named_tensors(model.params);
  auto grad_tensors = named_tensors(grads);
  for (size_t n = 0; n < model_tensors.size(); ++n) {
    TensorD& p = *model_tensors[n].tensor;
    const TensorD& g = *grad_tensors[n].tensor;
    for (size_t i = 0; i < p.values.size(); ++i) {
      params.push_back(&p.values[i]);
      analytic.push_back(g.values[i]);
    }
  }
  CHECK(params.size() > 1000);
  // kernel perturbations can flip pool argmaxes; those stencils are excluded
  // per the unique-argmax qualifier and must stay rare
  oracle::SmoothGradCheck check = oracle::max_grad_mismatch_smooth(params, analytic, loss);
  CHECK(check.worst < 1e-4);
  CHECK(check.checked > params.size() * 95 / 100);
}

TEST_CASE("model backward: zero upstream gradient, batch additivity") {
  ModelConfig cfg;
  cfg.conv_channels = 2;
  cfg.hidden = 3;
  ToneNet<float> seed_model = ToneNet<float>::init(cfg, 92, 21);
  ToneNet<double> model = convert_model<double>(seed_model);
  Rng rng(20);

  Cepstrogram feat_a = random_features(92, 92, rng);
  Cepstrogram feat_b = random_features(100, 92, rng);

  ModelCache<double> cache_a;
  TensorD logits_a = model.forward(feat_a, false, nullptr, &cache_a);
  ModelParams<double> zero_grads = zeros_like(model.params);
  TensorD zeros(logits_a.shape);
  model.backward(cache_a, zeros, zero_grads);
  for (auto& nt : named_tensors(zero_grads)) {
    for (double v : nt.tensor->values) CHECK(v == 0.0);
  }

  TensorD proj_a = random_tensor(logits_a.shape, rng);
  ModelCache<double> cache_b;
  TensorD logits_b = model.forward(feat_b, false, nullptr, &cache_b);
  TensorD proj_b = random_tensor(logits_b.shape, rng);

  ModelParams<double> g_a = zeros_like(model.params);
  model.backward(cache_a, proj_a, g_a);
  ModelParams<double> g_b = zeros_like(model.params);
  model.backward(cache_b, proj_b, g_b);
  ModelParams<double> g_sum = zeros_like(model.params);
  model.backward(cache_a, proj_a, g_sum);
  model.backward(cache_b, proj_b, g_sum);

  auto a_tensors = named_tensors(g_a);
  auto b_tensors = named_tensors(g_b);
  auto sum_tensors = named_tensors(g_sum);
  for (size_t n = 0; n < a_tensors.size(); ++n) {
    for (size_t i = 0; i < a_tensors[n].tensor->values.size(); ++i) {
      const double expected =
          a_tensors[n].tensor->values[i] + b_tensors[n].tensor->values[i];
      CHECK(sum_tensors[n].tensor->values[i] == doctest::Approx(expected).epsilon(1e-12));
    }
  }
}

TEST_CASE("train mode stochasticity is seed-determined") {
  ModelConfig cfg;
  cfg.conv_channels = 2;
  cfg.hidden = 3;
  ToneNet<float> model = ToneNet<float>::init(cfg, 92, 5);
  Rng feat_rng(22);
  Cepstrogram feat = random_features(96, 92, feat_rng);

  Rng rng1(99);
  Rng rng2(99);
  Rng rng3(100);
  Tensor a = model.forward(feat, true, &rng1, nullptr);
  Tensor b = model.forward(feat, true, &rng2, nullptr);
  Tensor c = model.forward(feat, true, &rng3, nullptr);
  CHECK(a.values == b.values);
  CHECK(a.values != c.values);
}
