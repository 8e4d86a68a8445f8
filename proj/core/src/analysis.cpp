#include "dre/analysis.hpp"

#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

namespace dre {

LipschitzReport estimate_lipschitz(
    const std::function<Vector(const Vector&)>& f,
    const std::vector<Vector>& states, int random_pairs, std::uint64_t seed,
    std::string domain) {
  if (states.size() < 2) {
    throw std::invalid_argument("estimate_lipschitz needs at least two states");
  }
  if (random_pairs < 0) {
    throw std::invalid_argument("estimate_lipschitz: random_pairs must be >= 0");
  }

  std::vector<Vector> values(states.size());
  for (std::size_t i = 0; i < states.size(); ++i) values[i] = f(states[i]);

  LipschitzReport est;
  est.domain = std::move(domain);
  est.L = -std::numeric_limits<double>::infinity();
  est.nu = -std::numeric_limits<double>::infinity();

  const auto consider = [&](std::size_t i, std::size_t j) {
    const Vector d = states[i] - states[j];
    const double d2 = d.squaredNorm();
    if (d2 == 0.0) return;  // duplicate points carry no slope information
    ++est.pairs;
    const Vector df = values[i] - values[j];
    const double L = std::sqrt(df.squaredNorm() / d2);
    const double nu = df.dot(d) / d2;
    if (L > est.L) {
      est.L = L;
      est.arg_a_L = states[i];
      est.arg_b_L = states[j];
    }
    if (nu > est.nu) {
      est.nu = nu;
      est.arg_a_nu = states[i];
      est.arg_b_nu = states[j];
    }
  };

  for (std::size_t i = 0; i + 1 < states.size(); ++i) consider(i, i + 1);

  std::mt19937_64 rng(seed);
  const std::uint64_t n = states.size();
  long drawn = 0;
  while (drawn < random_pairs) {
    const auto i = static_cast<std::size_t>(rng() % n);
    const auto j = static_cast<std::size_t>(rng() % n);
    if (i == j) continue;  // redraw; does not count toward random_pairs
    consider(i, j);
    ++drawn;
  }

  if (est.pairs == 0) {
    throw std::invalid_argument("estimate_lipschitz: all states coincide");
  }
  return est;
}

double b_stability_dt_bound(double L, double nu) {
  if (!(L > 0.0)) {
    throw std::invalid_argument("b_stability_dt_bound: L must be positive");
  }
  if (!(nu < 0.0)) {
    throw std::invalid_argument(
        "b_stability_dt_bound needs a dissipative system (nu < 0)");
  }
  return 2.0 * std::abs(nu) / (L * L);
}

double lyapunov_bound_at(const LyapunovInputs& in, double t) {
  if (!(in.Ks > 0.0)) {
    throw std::invalid_argument("lyapunov_bound_at: Ks must be positive");
  }
  const double initial = in.L_psi_prime * in.Delta0 + in.delta0 / in.Ks;
  const double growth = in.M_jac * in.Delta + in.delta / in.Ks;
  return in.L_psi * (initial + growth * t) * std::exp(in.L_fn * t);
}

Vector lyapunov_bound_curve(const LyapunovInputs& in,
                            const std::vector<double>& ts) {
  Vector out(static_cast<Eigen::Index>(ts.size()));
  for (std::size_t i = 0; i < ts.size(); ++i) {
    out[static_cast<Eigen::Index>(i)] = lyapunov_bound_at(in, ts[i]);
  }
  return out;
}

BoundReport perturbed_integrate(const ReducedModel& model, const Vector& mu,
                                const FixedGrid& grid, const SchemeSpec& scheme,
                                const PerturbationSpec& pert,
                                LyapunovInputs constants, double ref_atol,
                                double ref_rtol) {
  const Eigen::Index n = model.ae.latent_dim();
  const Eigen::Index N = model.ae.full_dim();
  if (pert.Delta0.size() != 0 && pert.Delta0.size() != N) {
    throw std::invalid_argument("perturbed_integrate: Delta0 has wrong dimension");
  }
  if (pert.delta0.size() != 0 && pert.delta0.size() != n) {
    throw std::invalid_argument("perturbed_integrate: delta0 has wrong dimension");
  }

  BoundReport report;
  report.name = "lyapunov";
  report.times.resize(static_cast<std::size_t>(grid.K) + 1);
  for (long j = 0; j <= grid.K; ++j) {
    report.times[static_cast<std::size_t>(j)] = grid.dt * static_cast<double>(j);
  }

  // Initial state: w(0) = encode(u0 + Delta0) + delta0 in the (possibly
  // shifted) frame the model solves in.
  Autoencoder ae_used;
  Vector w0 = model.initial_latent(mu, ae_used);
  const Vector u0 = model.problem.initial(mu);
  if (pert.Delta0.size() > 0) {
    w0 = ae_used.encode(u0 + pert.Delta0);
    report.realized_Delta0 = pert.Delta0.norm();
  }
  if (pert.delta0.size() > 0) {
    w0 += pert.delta0;
    report.realized_delta0 = pert.delta0.norm();
  }

  // Piecewise-constant right-hand-side offsets, one draw per step.
  const bool use_Delta = pert.Delta_lo != 0.0 || pert.Delta_hi != 0.0;
  const bool use_delta = pert.delta_lo != 0.0 || pert.delta_hi != 0.0;
  std::vector<Vector> Deltas, deltas;
  {
    std::mt19937_64 rng(pert.seed);
    std::uniform_real_distribution<double> dist_Delta(pert.Delta_lo, pert.Delta_hi);
    std::uniform_real_distribution<double> dist_delta(pert.delta_lo, pert.delta_hi);
    for (long k = 0; k < grid.K; ++k) {
      if (use_Delta) {
        Vector D(N);
        for (Eigen::Index i = 0; i < N; ++i) D[i] = dist_Delta(rng);
        report.realized_Delta_sup = std::max(report.realized_Delta_sup, D.norm());
        Deltas.push_back(std::move(D));
      }
      if (use_delta) {
        Vector d(n);
        for (Eigen::Index i = 0; i < n; ++i) d[i] = dist_delta(rng);
        report.realized_delta_sup = std::max(report.realized_delta_sup, d.norm());
        deltas.push_back(std::move(d));
      }
    }
  }

  const Rhs base = model.reduced_rhs(mu);
  const double dt = grid.dt;
  const long K = grid.K;
  const Rhs perturbed = [&](double t, const Vector& w) -> Vector {
    Vector f = base(t, w);
    if (use_Delta || use_delta) {
      long k = static_cast<long>(std::floor(t / dt));
      if (k < 0) k = 0;
      if (k >= K) k = K - 1;
      if (use_Delta) {
        const Vector x = ae_used.decode(w);
        f += ae_used.encode_jvp(x, Deltas[static_cast<std::size_t>(k)]);
      }
      if (use_delta) f += deltas[static_cast<std::size_t>(k)];
    }
    return f;
  };

  Matrix reduced;
  try {
    reduced = integrate_fixed(perturbed, w0, grid, scheme);
  } catch (const DivergenceError& e) {
    report.diverged = true;
    report.divergence_step = e.step;
    report.divergence_time = e.t;
  }

  constants.Ks = model.ae.Ks;
  constants.Delta0 = report.realized_Delta0;
  constants.delta0 = report.realized_delta0;
  constants.Delta = report.realized_Delta_sup;
  constants.delta = report.realized_delta_sup;
  report.bound = lyapunov_bound_curve(constants, report.times);

  if (!report.diverged) {
    report.perturbed = model.reconstruct(reduced, ae_used);
    const double T = grid.dt * static_cast<double>(grid.K);
    const DenseSolution ref = integrate_reference(model.problem.rhs_at(mu), u0,
                                                  0.0, T, ref_atol, ref_rtol);
    report.error.resize(static_cast<Eigen::Index>(report.times.size()));
    for (std::size_t j = 0; j < report.times.size(); ++j) {
      const Vector uref = ref.sample(report.times[j]);
      report.error[static_cast<Eigen::Index>(j)] =
          (report.perturbed.row(static_cast<Eigen::Index>(j)).transpose() - uref)
              .norm();
    }
  }
  return report;
}

}  // namespace dre
