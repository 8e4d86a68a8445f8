#include <cmath>

#include "doctest.h"
#include "dre/autoencoder.hpp"
#include "dre/problems.hpp"

using namespace dre;

namespace {

// Linear encoder picking the first two coordinates and its exact inverse on
// the embedded plane; identity normalization.
Autoencoder plane_autoencoder() {
  // Flat parameters are row-major: encoder rows (1,0,0), (0,1,0); decoder
  // rows (1,0), (0,1), (0,0).
  Vector pe(6), pd(6);
  pe << 1, 0, 0, 0, 1, 0;
  pd << 1, 0, 0, 1, 0, 0;
  Autoencoder ae;
  ae.encoder = Mlp({{LayerKind::Linear, 3, 2, Activation::Identity}}, pe);
  ae.decoder = Mlp({{LayerKind::Linear, 2, 3, Activation::Identity}}, pd);
  ae.norm = Normalization::identity(3);
  return ae;
}

Autoencoder small_nonlinear_autoencoder(std::uint64_t seed) {
  Autoencoder ae;
  ae.encoder = Mlp({{LayerKind::Affine, 3, 6, Activation::Elu},
                    {LayerKind::Linear, 6, 2, Activation::Identity}},
                   derive_seed(seed, 1));
  ae.decoder = Mlp({{LayerKind::Linear, 2, 6, Activation::PRelu},
                    {LayerKind::Affine, 6, 3, Activation::Identity}},
                   derive_seed(seed, 2));
  ae.norm.mean.resize(3);
  ae.norm.mean << 0.5, -1.0, 2.0;
  ae.norm.scale.resize(3);
  ae.norm.scale << 2.0, 1.0, 0.5;
  return ae;
}

}  // namespace

TEST_SUITE("autoencoder") {

TEST_CASE("normalization fit uses column means and sample standard deviations") {
  Matrix rows(3, 3);
  rows << 1.0, 5.0, 7.0,
          3.0, 5.0, 7.0,
          5.0, 5.0, 7.0;
  Normalization n = Normalization::fit(rows);
  CHECK(n.mean[0] == doctest::Approx(3.0).epsilon(1e-15));
  CHECK(n.mean[1] == doctest::Approx(5.0).epsilon(1e-15));
  // Sample std of {1,3,5} is 2; constant columns fall back to scale 1.
  CHECK(n.scale[0] == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(n.scale[1] == 1.0);
  CHECK(n.scale[2] == 1.0);

  Vector x(3);
  x << 5.0, 5.0, 8.0;
  Vector xh = n.apply(x);
  CHECK(xh[0] == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(xh[1] == 0.0);
  CHECK(xh[2] == doctest::Approx(1.0).epsilon(1e-14));
  CHECK((n.invert(xh) - x).lpNorm<Eigen::Infinity>() < 1e-14);

  CHECK_THROWS_AS(Normalization::fit(Matrix::Zero(1, 3)), std::invalid_argument);
}

TEST_CASE("encode and decode follow the scaling and shift conventions") {
  Autoencoder ae = plane_autoencoder();
  ae.Ks = 2.0;
  ae.latent_shift = Vector(2);
  ae.latent_shift << 0.25, -0.5;

  Vector u(3);
  u << 3.0, -1.0, 7.0;
  // encode = Ks * enc(u) - shift = (6, -2) - (0.25, -0.5).
  Vector z = ae.encode(u);
  CHECK(z[0] == doctest::Approx(5.75).epsilon(1e-15));
  CHECK(z[1] == doctest::Approx(-1.5).epsilon(1e-15));
  // decode undoes both conventions; the third coordinate projects to zero.
  Vector rec = ae.decode(z);
  CHECK(rec[0] == doctest::Approx(3.0).epsilon(1e-15));
  CHECK(rec[1] == doctest::Approx(-1.0).epsilon(1e-15));
  CHECK(rec[2] == 0.0);
}

TEST_CASE("reconstructions are invariant to scaling and shift") {
  Autoencoder base = small_nonlinear_autoencoder(77u);
  Vector u(3);
  u << 1.2, -0.4, 0.9;
  Vector rec0 = base.reconstruct(u);

  // A power-of-two factor cancels exactly in floating point.
  Autoencoder scaled = with_scaling(base, 2.0);
  CHECK((scaled.reconstruct(u) - rec0).lpNorm<Eigen::Infinity>() == 0.0);

  // A generic factor and a shift still cancel to rounding.
  Autoencoder generic = with_scaling(base, 1.7);
  generic.latent_shift = Vector(2);
  generic.latent_shift << 3.0, -2.0;
  CHECK((generic.reconstruct(u) - rec0).lpNorm<Eigen::Infinity>() < 1e-12);
}

TEST_CASE("with_scaling validates its arguments and ordering") {
  Autoencoder base = small_nonlinear_autoencoder(5u);
  CHECK_THROWS_AS(with_scaling(base, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(with_scaling(base, -2.0), std::invalid_argument);
  Autoencoder shifted = shift_to_zero_initial(base, Vector::Zero(3));
  CHECK_THROWS_AS(with_scaling(shifted, 2.0), std::invalid_argument);
}

TEST_CASE("shift_to_zero_initial zeroes the encoded initial state exactly") {
  Autoencoder base = small_nonlinear_autoencoder(13u);
  base.Ks = 1.5;
  Vector u0(3);
  u0 << 0.7, 0.1, -0.3;
  Autoencoder shifted = shift_to_zero_initial(base, u0);
  CHECK(shifted.encode(u0).lpNorm<Eigen::Infinity>() == 0.0);
  // Reconstructions are untouched by the reparameterization.
  CHECK((shifted.reconstruct(u0) - base.reconstruct(u0)).lpNorm<Eigen::Infinity>()
        < 1e-13);
}

TEST_CASE("validate rejects inconsistent wiring") {
  Autoencoder ae = plane_autoencoder();
  CHECK_NOTHROW(ae.validate());
  Autoencoder bad = ae;
  bad.Ks = -1.0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = ae;
  bad.norm = Normalization::identity(4);
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = ae;
  bad.latent_shift = Vector::Zero(3);
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("encode_jvp matches the materialized jacobian and finite differences") {
  Autoencoder ae = small_nonlinear_autoencoder(31u);
  ae.Ks = 1.25;
  Vector u(3), v(3);
  u << 0.4, -0.2, 1.1;
  v << -1.0, 0.5, 2.0;

  Matrix J = ae.encode_jacobian(u);
  CHECK(J.rows() == 2);
  CHECK(J.cols() == 3);
  Vector jvp = ae.encode_jvp(u, v);
  CHECK((jvp - J * v).lpNorm<Eigen::Infinity>() < 1e-12);

  const double h = 1e-6;
  Vector fd = (ae.encode(u + h * v) - ae.encode(u - h * v)) / (2.0 * h);
  CHECK((jvp - fd).lpNorm<Eigen::Infinity>() < 1e-6);

  // The decoder jacobian is consistent the same way.
  Vector z = ae.encode(u);
  Matrix Jd = ae.decode_jacobian(z);
  Vector w(2);
  w << 0.3, -0.8;
  Vector fdd = (ae.decode(z + h * w) - ae.decode(z - h * w)) / (2.0 * h);
  CHECK((Jd * w - fdd).lpNorm<Eigen::Infinity>() < 1e-6);
}

TEST_CASE("exact_reduced_rhs equals the encoder jacobian applied to the rhs") {
  Autoencoder ae = small_nonlinear_autoencoder(47u);
  OdeProblem p = make_problem("test1-nonlinear");
  Vector mu(1);
  mu << 2.0;
  auto FN = [&](const Vector& u) { return p.rhs(u, mu); };

  Vector un(2);
  un << 0.6, -0.9;
  Vector got = exact_reduced_rhs(ae, FN, un);

  Vector x = ae.decode(un);
  Vector expect = ae.encode_jacobian(x) * FN(x);
  CHECK((got - expect).lpNorm<Eigen::Infinity>() < 1e-12);
  const double denom = expect.lpNorm<Eigen::Infinity>();
  CHECK(denom > 0.0);
  CHECK((got - expect).lpNorm<Eigen::Infinity>() / denom < 1e-6);
}

}  // TEST_SUITE("autoencoder")
