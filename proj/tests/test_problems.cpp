#include <Eigen/Eigenvalues>
#include <cmath>

#include "doctest.h"
#include "dre/problems.hpp"

using namespace dre;

TEST_SUITE("problems") {

TEST_CASE("sir rhs reproduces a hand-computed euler step") {
  OdeProblem sir = sir_problem();
  CHECK(sir.dim == 3);
  CHECK(sir.param_dim == 1);
  CHECK(sir.param_box(0, 0) == 0.5);
  CHECK(sir.param_box(0, 1) == 2.5);
  CHECK(sir.default_T == 20.0);

  Vector mu(1);
  mu << 1.0;
  Vector u0 = sir.initial(mu);
  CHECK(u0[0] == 90.0);
  CHECK(u0[1] == 10.0);
  CHECK(u0[2] == 0.0);

  // S' = -(1/100) * 10 * 90 = -9, I' = 9 - 0.5*10 = 4, R' = 5.
  Vector u1 = u0 + 0.1 * sir.rhs(u0, mu);
  CHECK(u1[0] == doctest::Approx(89.1).epsilon(1e-14));
  CHECK(u1[1] == doctest::Approx(10.4).epsilon(1e-14));
  CHECK(u1[2] == doctest::Approx(0.5).epsilon(1e-14));
}

TEST_CASE("sir conserves the population exactly in the rhs") {
  OdeProblem sir = sir_problem();
  Vector mu(1);
  mu << 2.5;
  Vector u(3);
  u << 37.0, 21.5, 41.5;
  CHECK(std::abs(sir.rhs(u, mu).sum()) < 1e-13);
}

TEST_CASE("chemistry stoichiometry columns sum to zero exactly") {
  const Matrix& S = chemistry_stoichiometry();
  CHECK(S.rows() == 19);
  CHECK(S.cols() == 6);
  Vector colsum = S.transpose() * Vector::Ones(19);
  for (int j = 0; j < 6; ++j) CHECK(colsum[j] == 0.0);
}

TEST_CASE("chemistry rhs conserves the total concentration") {
  OdeProblem chem = chemistry_problem();
  CHECK(chem.dim == 19);
  CHECK(chem.param_dim == 2);
  Vector mu(2);
  mu << 0.84, 8.0;
  Vector u0 = chem.initial(mu);
  // 1^T (S r) vanishes up to summation roundoff.
  CHECK(std::abs(chem.rhs(u0, mu).sum()) < 1e-12);
}

TEST_CASE("chemistry initial total is 11.67 at the middle of the mu1 range") {
  OdeProblem chem = chemistry_problem();
  const double mu1_mid = 0.5 * (chem.param_box(0, 0) + chem.param_box(0, 1));
  CHECK(mu1_mid == doctest::Approx(0.84).epsilon(1e-15));
  Vector mu(2);
  mu << mu1_mid, 8.0;
  CHECK(chem.initial(mu).sum() == doctest::Approx(11.67).epsilon(1e-14));
}

TEST_CASE("chemistry reference trajectories hold the total to 1e-8") {
  OdeProblem chem = chemistry_problem();
  Vector mu(2);
  mu << 0.84, 8.0;
  Vector u0 = chem.initial(mu);
  DenseSolution sol =
      integrate_reference(chem.rhs_at(mu), u0, 0.0, chem.default_T);
  const double total0 = u0.sum();
  Matrix grid = sol.sample_grid(0.1, 30);
  for (Eigen::Index j = 0; j < grid.rows(); ++j) {
    CHECK(std::abs(grid.row(j).sum() - total0) < 1e-8);
  }
}

TEST_CASE("the diagonal linear case exposes its matrix and spectrum") {
  OdeProblem p = make_problem("test1-linear");
  CHECK(p.is_linear);
  CHECK(p.dim == 3);
  CHECK(p.default_T == 0.5);
  Vector evs = Eigen::SelfAdjointEigenSolver<Matrix>(p.A).eigenvalues();
  CHECK(evs[0] == doctest::Approx(-5.0).epsilon(1e-12));
  CHECK(evs[1] == doctest::Approx(-5.0).epsilon(1e-12));
  CHECK(evs[2] == doctest::Approx(-3.0).epsilon(1e-12));

  Vector mu(1);
  mu << 3.0;
  Vector u0 = p.initial(mu);
  CHECK(u0[0] == 3.0);
  CHECK(u0[1] == 1.0);
  CHECK(u0[2] == 1.0);
}

TEST_CASE("the dense linear case is symmetric negative definite") {
  OdeProblem p = make_problem("test1-nonlinear");
  CHECK(p.is_linear);
  CHECK((p.A - p.A.transpose()).lpNorm<Eigen::Infinity>() == 0.0);
  Vector evs = Eigen::SelfAdjointEigenSolver<Matrix>(p.A).eigenvalues();
  CHECK(evs.maxCoeff() < 0.0);
}

TEST_CASE("wide linear cases are reproducible and strictly stable") {
  OdeProblem p = make_problem("test1-nonlinear-N100");
  CHECK(p.dim == 100);
  OdeProblem q = make_problem("test1-nonlinear-N100");
  CHECK((p.A - q.A).lpNorm<Eigen::Infinity>() == 0.0);
  Vector evs = Eigen::SelfAdjointEigenSolver<Matrix>(p.A).eigenvalues();
  CHECK(evs.maxCoeff() <= -1.0 + 1e-12);
}

TEST_CASE("problem registry covers the published names and rejects others") {
  for (const auto& name : problem_names()) CHECK_NOTHROW(make_problem(name));
  CHECK_THROWS_AS(make_problem("lorenz"), std::invalid_argument);
}

TEST_CASE("scale_mu01 maps the parameter box onto the unit cube") {
  OdeProblem chem = chemistry_problem();
  Vector lo(2), hi(2), mid(2);
  lo << 0.74, 5.0;
  hi << 0.94, 11.0;
  mid << 0.84, 8.0;
  CHECK(scale_mu01(chem, lo).isZero(0.0));
  CHECK((scale_mu01(chem, hi) - Vector::Ones(2)).lpNorm<Eigen::Infinity>() < 1e-15);
  CHECK(scale_mu01(chem, mid)[0] == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(scale_mu01(chem, mid)[1] == doctest::Approx(0.5).epsilon(1e-12));

  // Degenerate bounds map to zero instead of dividing by zero.
  OdeProblem p = make_problem("test1-linear");
  p.param_box(0, 1) = p.param_box(0, 0);
  Vector mu(1);
  mu << p.param_box(0, 0);
  CHECK(scale_mu01(p, mu)[0] == 0.0);
}

TEST_CASE("manifold samples are deterministic in count and seed") {
  for (const auto& name : manifold_names()) {
    StaticManifold m = make_manifold(name);
    Matrix a = m.sample(64, 9u);
    Matrix b = m.sample(64, 9u);
    CHECK(a.rows() == 64);
    CHECK(a.cols() == 3);
    CHECK((a - b).lpNorm<Eigen::Infinity>() == 0.0);
    Matrix c = m.sample(64, 10u);
    CHECK((a - c).lpNorm<Eigen::Infinity>() != 0.0);
  }
  CHECK_THROWS_AS(make_manifold("sphere"), std::invalid_argument);
}

TEST_CASE("flat-line samples are collinear") {
  StaticManifold line = make_manifold("flat-line");
  Matrix pts = line.sample(32, 5u);
  Matrix centered = pts.rowwise() - pts.colwise().mean();
  Eigen::JacobiSVD<Matrix> svd(centered);
  // One dominant direction; the residual singular values vanish.
  CHECK(svd.singularValues()[1] < 1e-12 * svd.singularValues()[0]);
}

TEST_CASE("coil points satisfy the closed-form parameterization") {
  StaticManifold coil = make_manifold("coil");
  Matrix pts = coil.sample(128, 3u);
  for (Eigen::Index i = 0; i < pts.rows(); ++i) {
    const double th = pts(i, 2) / 0.2;  // third coordinate is 0.2 theta
    const double r = 2.0 * M_PI / (2.0 * M_PI + th);
    CHECK(pts(i, 0) == doctest::Approx(r * std::cos(th)).epsilon(1e-10));
    CHECK(pts(i, 1) == doctest::Approx(r * std::sin(th)).epsilon(1e-10));
  }

  // The noisy variant modulates the radius by 0.05 sin(4 theta).
  StaticManifold noisy = make_manifold("noisy-coil");
  Matrix npts = noisy.sample(128, 3u);
  for (Eigen::Index i = 0; i < npts.rows(); ++i) {
    const double th = npts(i, 2) / 0.2;
    const double r = 2.0 * M_PI / (2.0 * M_PI + th) + 0.05 * std::sin(4.0 * th);
    const double rad = std::hypot(npts(i, 0), npts(i, 1));
    CHECK(rad == doctest::Approx(std::abs(r)).epsilon(1e-10));
  }
}

TEST_CASE("graph samples lie on the graph surface") {
  StaticManifold g = make_manifold("graph");
  CHECK(g.intrinsic_dim == 2);
  Matrix pts = g.sample(64, 11u);
  for (Eigen::Index i = 0; i < pts.rows(); ++i) {
    const double z = 0.4 * std::sin(M_PI * pts(i, 0)) * std::cos(M_PI * pts(i, 1));
    CHECK(pts(i, 2) == doctest::Approx(z).epsilon(1e-12));
  }
}

}  // TEST_SUITE("problems")
