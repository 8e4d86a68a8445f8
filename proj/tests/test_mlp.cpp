#include <cmath>
#include <cstdio>
#include <random>

#include "doctest.h"
#include "dre/checkpoint.hpp"
#include "dre/mlp.hpp"

using namespace dre;

namespace {

// Central finite difference of a scalar function of one parameter entry.
double central_fd(const std::function<double(double)>& f, double x0, double h) {
  return (f(x0 + h) - f(x0 - h)) / (2.0 * h);
}

std::vector<LayerSpec> small_mixed_net() {
  return {{LayerKind::Affine, 3, 5, Activation::PRelu},
          {LayerKind::Linear, 5, 4, Activation::Elu},
          {LayerKind::Affine, 4, 2, Activation::Identity}};
}

}  // namespace

TEST_SUITE("mlp") {

TEST_CASE("count_params tallies weights, biases and prelu slopes") {
  // Linear 3 -> 2: six weights, nothing else.
  CHECK(count_params({{LayerKind::Linear, 3, 2, Activation::Identity}}) == 6);
  // Affine 3 -> 2 with PReLU: 6 weights + 2 biases + 1 slope.
  CHECK(count_params({{LayerKind::Affine, 3, 2, Activation::PRelu}}) == 9);
  // ELU carries no learnable parameter.
  CHECK(count_params({{LayerKind::Affine, 3, 2, Activation::Elu}}) == 8);
  CHECK(count_params(small_mixed_net()) == (15 + 5 + 1) + 20 + (8 + 2));
}

TEST_CASE("forward matches a hand computation through both prelu branches") {
  // One affine PReLU layer, 2 -> 2. Parameters flat: W row-major, bias, slope.
  Mlp net({{LayerKind::Affine, 2, 2, Activation::PRelu}}, Vector::Zero(7));
  Vector p(7);
  p << 1.0, 2.0,   // W row 0
      -1.0, 0.5,   // W row 1
      0.5, -0.25,  // bias
      0.1;         // slope
  net.params() = p;
  Vector x(2);
  x << 1.0, 1.0;
  // preact = (1+2+0.5, -1+0.5-0.25) = (3.5, -0.75); PReLU -> (3.5, -0.075).
  Vector y = net.forward(x);
  CHECK(y[0] == doctest::Approx(3.5).epsilon(1e-15));
  CHECK(y[1] == doctest::Approx(-0.075).epsilon(1e-15));
}

TEST_CASE("elu activation is z for z >= 0 and exp(z)-1 otherwise") {
  Mlp net({{LayerKind::Linear, 1, 1, Activation::Elu}}, Vector::Ones(1));
  Vector x(1);
  x << 2.0;
  CHECK(net.forward(x)[0] == doctest::Approx(2.0).epsilon(1e-15));
  x << -1.5;
  CHECK(net.forward(x)[0] == doctest::Approx(std::exp(-1.5) - 1.0).epsilon(1e-15));
}

TEST_CASE("seeded init is deterministic and respects the kaiming bounds") {
  Mlp a(small_mixed_net(), 1234u);
  Mlp b(small_mixed_net(), 1234u);
  Mlp c(small_mixed_net(), 1235u);
  CHECK(a.params() == b.params());
  CHECK(a.params() != c.params());

  // First layer weights live in [-sqrt(6/3), sqrt(6/3)], biases are zero,
  // the PReLU slope starts at 0.25.
  const double bound = std::sqrt(6.0 / 3.0);
  for (Eigen::Index i = 0; i < 15; ++i) {
    CHECK(std::abs(a.params()[a.weight_offset(0) + i]) <= bound);
  }
  CHECK(a.params().segment(a.bias_offset(0), 5).isZero(0.0));
  CHECK(a.params()[a.slope_offset(0)] == 0.25);
}

TEST_CASE("offset queries reject layers without the block") {
  Mlp net(small_mixed_net(), 7u);
  CHECK_NOTHROW(net.bias_offset(0));
  CHECK_THROWS_AS(net.bias_offset(1), std::exception);  // layer 1 is Linear
  CHECK_NOTHROW(net.slope_offset(0));
  CHECK_THROWS_AS(net.slope_offset(1), std::exception);  // ELU has no slope
  CHECK_THROWS_AS(net.slope_offset(2), std::exception);  // Identity neither
}

TEST_CASE("constructors validate sizes") {
  CHECK_THROWS_AS(Mlp(small_mixed_net(), Vector::Zero(3)), std::exception);
  Mlp net(small_mixed_net(), 7u);
  CHECK_THROWS_AS(net.forward(Vector::Zero(2)), std::exception);
}

TEST_CASE("backward gradient matches central differences") {
  Mlp net(small_mixed_net(), 99u);
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Vector x(3), target(2);
  for (int i = 0; i < 3; ++i) x[i] = u(rng);
  for (int i = 0; i < 2; ++i) target[i] = u(rng);

  // loss = 0.5 || net(x) - target ||^2, dL/dy = y - target.
  auto loss_at = [&](const Vector& params) {
    Mlp probe(net.layers(), params);
    return 0.5 * (probe.forward(x) - target).squaredNorm();
  };
  Vector grad = Vector::Zero(net.param_count());
  Mlp::Cache cache = net.forward_cached(x);
  net.backward(cache, cache.output - target, grad);

  const double h = 1e-6;
  for (Eigen::Index j = 0; j < net.param_count(); ++j) {
    Vector p = net.params();
    const double fd = central_fd(
        [&](double v) {
          Vector q = p;
          q[j] = v;
          return loss_at(q);
        },
        p[j], h);
    CHECK(grad[j] == doctest::Approx(fd).epsilon(1e-6));
  }
}

TEST_CASE("backward input gradient matches central differences") {
  Mlp net(small_mixed_net(), 21u);
  Vector x(3);
  x << 0.3, -0.7, 0.2;
  Vector target = Vector::Zero(2);

  Vector grad = Vector::Zero(net.param_count());
  Mlp::Cache cache = net.forward_cached(x);
  Vector dx = net.backward(cache, cache.output - target, grad);

  const double h = 1e-6;
  for (int j = 0; j < 3; ++j) {
    const double fd = central_fd(
        [&](double v) {
          Vector q = x;
          q[j] = v;
          return 0.5 * net.forward(q).squaredNorm();
        },
        x[j], h);
    CHECK(dx[j] == doctest::Approx(fd).epsilon(1e-6));
  }
}

TEST_CASE("backward accumulates into an existing gradient") {
  Mlp net(small_mixed_net(), 3u);
  Vector x(3);
  x << 1.0, -0.5, 0.25;
  Mlp::Cache cache = net.forward_cached(x);
  Vector dLdy = Vector::Ones(2);

  Vector once = Vector::Zero(net.param_count());
  net.backward(cache, dLdy, once);
  Vector twice = Vector::Zero(net.param_count());
  net.backward(cache, dLdy, twice);
  net.backward(cache, dLdy, twice);
  CHECK((twice - 2.0 * once).lpNorm<Eigen::Infinity>() == 0.0);
}

TEST_CASE("input_jvp agrees with the dense jacobian and finite differences") {
  Mlp net(small_mixed_net(), 11u);
  Vector x(3), v(3);
  x << 0.4, -0.3, 0.9;
  v << 1.0, -2.0, 0.5;

  Matrix J = net.input_jacobian(x);
  Vector jvp = net.input_jvp(x, v);
  CHECK((jvp - J * v).lpNorm<Eigen::Infinity>() < 1e-12);

  const double h = 1e-6;
  Vector fd = (net.forward(x + h * v) - net.forward(x - h * v)) / (2.0 * h);
  CHECK((jvp - fd).lpNorm<Eigen::Infinity>() < 1e-6);
}

TEST_CASE("grad_params equals backward for a quadratic loss") {
  Mlp net(small_mixed_net(), 13u);
  Vector x(3);
  x << -0.2, 0.6, 0.1;
  Vector via_backward = Vector::Zero(net.param_count());
  Mlp::Cache cache = net.forward_cached(x);
  net.backward(cache, cache.output, via_backward);
  Vector via_helper =
      net.grad_params(x, [](const Vector& y) -> Vector { return y; });
  CHECK((via_helper - via_backward).lpNorm<Eigen::Infinity>() == 0.0);
}

TEST_CASE("non-finite activations raise NumericError with the layer index") {
  Mlp net({{LayerKind::Affine, 2, 2, Activation::PRelu},
           {LayerKind::Affine, 2, 1, Activation::Identity}},
          17u);
  Vector x(2);
  x << std::numeric_limits<double>::infinity(), 0.0;
  try {
    net.forward(x);
    FAIL("expected NumericError");
  } catch (const NumericError& e) {
    CHECK(e.layer == 0);
  }
}

}  // TEST_SUITE("mlp")

TEST_SUITE("checkpoint") {

TEST_CASE("save, load, save round-trips byte for byte") {
  Mlp net(small_mixed_net(), 2024u);
  const std::string p1 = "ckpt_roundtrip_a.json";
  const std::string p2 = "ckpt_roundtrip_b.json";
  save_checkpoint(net, p1);
  Mlp loaded = load_checkpoint(p1);
  CHECK(loaded.params() == net.params());
  CHECK(loaded.layers().size() == net.layers().size());
  save_checkpoint(loaded, p2);

  auto slurp = [](const std::string& path) {
    FILE* f = std::fopen(path.c_str(), "rb");
    REQUIRE(f != nullptr);
    std::string s;
    char buf[4096];
    size_t n;
    while ((n = std::fread(buf, 1, sizeof buf, f)) > 0) s.append(buf, n);
    std::fclose(f);
    return s;
  };
  CHECK(slurp(p1) == slurp(p2));
  std::remove(p1.c_str());
  std::remove(p2.c_str());
}

TEST_CASE("name maps cover every enum value both ways") {
  for (auto k : {LayerKind::Linear, LayerKind::Affine}) {
    CHECK(layer_kind_from_name(layer_kind_name(k)) == k);
  }
  for (auto a : {Activation::Identity, Activation::PRelu, Activation::Elu}) {
    CHECK(activation_from_name(activation_name(a)) == a);
  }
  CHECK_THROWS_AS(layer_kind_from_name("dense"), std::exception);
  CHECK_THROWS_AS(activation_from_name("relu6"), std::exception);
}

}  // TEST_SUITE("checkpoint")
