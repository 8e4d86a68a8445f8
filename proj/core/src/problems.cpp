#include "dre/problems.hpp"

#include <cmath>
#include <random>

#include <Eigen/Eigenvalues>

namespace dre {

OdeProblem linear_problem(std::string name, Matrix A,
                          std::function<Vector(const Vector&)> initial,
                          Matrix param_box, double T) {
  if (A.rows() != A.cols()) throw std::invalid_argument("linear_problem: A must be square");
  OdeProblem p;
  p.name = std::move(name);
  p.dim = static_cast<int>(A.rows());
  p.param_dim = static_cast<int>(param_box.rows());
  p.param_box = std::move(param_box);
  p.default_T = T;
  p.is_linear = true;
  p.A = std::move(A);
  Matrix Acopy = p.A;
  p.rhs = [Acopy](const Vector& u, const Vector&) -> Vector { return Acopy * u; };
  p.initial = std::move(initial);
  return p;
}

OdeProblem sir_problem() {
  OdeProblem p;
  p.name = "sir";
  p.dim = 3;
  p.param_dim = 1;
  p.param_box = Matrix(1, 2);
  p.param_box << 0.5, 2.5;
  p.default_T = 20.0;
  const double gamma = 0.5, population = 100.0;
  p.rhs = [gamma, population](const Vector& u, const Vector& mu) -> Vector {
    const double beta = mu[0];
    const double infection = beta / population * u[1] * u[0];
    Vector f(3);
    f << -infection, infection - gamma * u[1], gamma * u[1];
    return f;
  };
  p.initial = [](const Vector&) -> Vector {
    Vector u0(3);
    u0 << 90.0, 10.0, 0.0;
    return u0;
  };
  return p;
}

const Matrix& chemistry_stoichiometry() {
  static const Matrix S = [] {
    Matrix St(6, 19);
    St << 1, 0, -1, -1, 0, 0, 0, 0, 1, 0, -1, 0, 0, 0, 0, 1, -1, 1, 0,
        -1, 1, 0, 0, -1, 0, 0, 0, 0, 1, 0, -1, 0, 0, 0, 0, 1, -1, 1,
        0, -1, 1, 1, 0, -1, 0, 0, 0, 0, 1, 0, -1, 0, 0, 0, 0, 0, 0,
        1, 0, -1, 0, 1, 0, -1, 0, 0, 0, 0, 1, 0, -1, 0, 0, 0, 0, 0,
        -1, 1, 0, 0, 0, 1, 0, -1, 0, 0, 0, 0, 1, 0, -1, 0, 0, 0, 0,
        0, -1, 1, 0, 0, 0, 1, 0, -1, 0, 0, 0, 0, 1, 0, -1, 0, 1, -1;
    return Matrix(St.transpose());
  }();
  return S;
}

Vector chemistry_rates(const Vector& u, const Vector& k) {
  const Matrix& S = chemistry_stoichiometry();
  Vector r(S.cols());
  for (Eigen::Index j = 0; j < S.cols(); ++j) {
    double prod = k[j];
    for (Eigen::Index i = 0; i < S.rows(); ++i)
      if (S(i, j) < 0.0)
        for (int e = 0; e < static_cast<int>(-S(i, j)); ++e) prod *= u[i];
    r[j] = prod;
  }
  return r;
}

OdeProblem chemistry_problem() {
  OdeProblem p;
  p.name = "chemistry";
  p.dim = 19;
  p.param_dim = 2;
  p.param_box = Matrix(2, 2);
  p.param_box << 0.74, 0.94, 5.0, 11.0;
  p.default_T = 3.0;
  p.rhs = [](const Vector& u, const Vector& mu) -> Vector {
    Vector k(6);
    k << 5.0, mu[1], 5.0, 5.0, 5.0, 5.0;
    return chemistry_stoichiometry() * chemistry_rates(u, k);
  };
  p.initial = [](const Vector& mu) -> Vector {
    Vector u0(19);
    u0 << 0.79, mu[0], 0.92, 0.41, 0.32, 0.39, 0.68, 0.89, 0.02, 0.28, 0.58, 0.94,
        0.1, 0.9, 0.83, 0.72, 0.72, 0.50, 0.84;
    return u0;
  };
  return p;
}

namespace {

// Initial condition (mu, 1, ..., 1) shared by the 3/100/500-dimensional
// linear cases; mu ~ U(1, 5) scales the first component.
std::function<Vector(const Vector&)> first_component_ic(int dim) {
  return [dim](const Vector& mu) -> Vector {
    Vector u0 = Vector::Ones(dim);
    u0[0] = mu[0];
    return u0;
  };
}

Matrix mu_box_1_5() {
  Matrix box(1, 2);
  box << 1.0, 5.0;
  return box;
}

// Seeded random symmetric negative-definite matrix; the spectrum is shifted
// to lie strictly below -1, and problems report it through OdeProblem::A.
Matrix random_negative_definite(int dim, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  Matrix M(dim, dim);
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j) M(i, j) = uni(rng);
  Matrix S = (M + M.transpose()) / (2.0 * std::sqrt(static_cast<double>(dim)));
  Eigen::SelfAdjointEigenSolver<Matrix> es(S);
  const double shift = es.eigenvalues().maxCoeff() + 1.0;
  return S - shift * Matrix::Identity(dim, dim);
}

}  // namespace

OdeProblem make_problem(const std::string& name) {
  if (name == "test1-linear") {
    Matrix A = Matrix::Zero(3, 3);
    A.diagonal() << -3.0, -5.0, -5.0;
    return linear_problem("test1-linear", A, first_component_ic(3), mu_box_1_5(), 0.5);
  }
  if (name == "test1-nonlinear") {
    Matrix A(3, 3);
    A << -4.75, -1.55, -0.79,
        -1.55, -4.31, -1.02,
        -0.79, -1.02, -5.2;
    return linear_problem("test1-nonlinear", A, first_component_ic(3), mu_box_1_5(), 0.5);
  }
  if (name == "test1-nonlinear-N100")
    return linear_problem("test1-nonlinear-N100", random_negative_definite(100, 100),
                          first_component_ic(100), mu_box_1_5(), 0.5);
  if (name == "test1-nonlinear-N500")
    return linear_problem("test1-nonlinear-N500", random_negative_definite(500, 500),
                          first_component_ic(500), mu_box_1_5(), 0.5);
  if (name == "sir") return sir_problem();
  if (name == "chemistry") return chemistry_problem();
  throw std::invalid_argument("unknown problem '" + name + "'");
}

std::vector<std::string> problem_names() {
  return {"test1-linear", "test1-nonlinear", "test1-nonlinear-N100",
          "test1-nonlinear-N500", "sir", "chemistry"};
}

Vector scale_mu01(const OdeProblem& problem, const Vector& mu) {
  if (mu.size() != problem.param_dim)
    throw std::invalid_argument("scale_mu01: mu has wrong dimension for " +
                                problem.name);
  Vector out(mu.size());
  for (Eigen::Index i = 0; i < mu.size(); ++i) {
    const double lo = problem.param_box(i, 0), hi = problem.param_box(i, 1);
    out[i] = (hi > lo) ? (mu[i] - lo) / (hi - lo) : 0.0;
  }
  return out;
}

namespace {

Matrix sample_1d(int count, std::uint64_t seed, double lo, double hi,
                 const std::function<Vector(double)>& point) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(lo, hi);
  Matrix out;
  for (int i = 0; i < count; ++i) {
    Vector p = point(uni(rng));
    if (i == 0) out.resize(count, p.size());
    out.row(i) = p;
  }
  return out;
}

}  // namespace

StaticManifold make_manifold(const std::string& name) {
  StaticManifold m;
  m.name = name;
  m.ambient_dim = 3;
  if (name == "flat-line") {
    m.intrinsic_dim = 1;
    m.sample = [](int count, std::uint64_t seed) {
      Vector p0(3), d(3);
      p0 << 0.5, -0.3, 0.2;
      d << 1.0, 2.0, -1.0;
      d.normalize();
      return sample_1d(count, seed, -1.0, 1.0,
                       [&](double s) -> Vector { return p0 + s * d; });
    };
    return m;
  }
  if (name == "graph") {
    m.intrinsic_dim = 2;
    m.sample = [](int count, std::uint64_t seed) {
      std::mt19937_64 rng(seed);
      std::uniform_real_distribution<double> uni(-1.0, 1.0);
      Matrix out(count, 3);
      for (int i = 0; i < count; ++i) {
        const double x = uni(rng), y = uni(rng);
        out.row(i) << x, y, 0.4 * std::sin(M_PI * x) * std::cos(M_PI * y);
      }
      return out;
    };
    return m;
  }
  if (name == "coil" || name == "noisy-coil") {
    m.intrinsic_dim = 1;
    const bool noisy = (name == "noisy-coil");
    m.sample = [noisy](int count, std::uint64_t seed) {
      return sample_1d(count, seed, 0.0, 6.0 * M_PI, [noisy](double th) -> Vector {
        double r = 2.0 * M_PI / (2.0 * M_PI + th);
        if (noisy) r += 0.05 * std::sin(4.0 * th);
        Vector p(3);
        p << r * std::cos(th), r * std::sin(th), 0.2 * th;
        return p;
      });
    };
    return m;
  }
  throw std::invalid_argument("unknown manifold '" + name + "'");
}

std::vector<std::string> manifold_names() {
  return {"flat-line", "graph", "coil", "noisy-coil"};
}

}  // namespace dre
