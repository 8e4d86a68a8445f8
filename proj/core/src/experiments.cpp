#include "dre/experiments.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>

#include "dre/analysis.hpp"
#include "dre/convergence.hpp"
#include "dre/dataset.hpp"
#include "dre/metrics.hpp"
#include "dre/net_presets.hpp"
#include "dre/reduced_model.hpp"
#include "dre/trainer.hpp"

namespace dre {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::uint64_t resolve_seed(const RunConfig& cfg) {
  const char* env = std::getenv("DRE_SEED");
  if (env == nullptr || *env == '\0') return cfg.seed;
  char* end = nullptr;
  unsigned long long v = std::strtoull(env, &end, 10);
  if (end == env || *end != '\0')
    throw UsageError("DRE_SEED must be a non-negative integer, got '" +
                     std::string(env) + "'");
  return static_cast<std::uint64_t>(v);
}

// Every command owns one output directory; reusing one is an explicit choice.
void claim_out_dir(const RunConfig& cfg) {
  if (cfg.out.empty()) throw UsageError(cfg.subcommand + ": --out is required");
  if (fs::exists(cfg.out) && !cfg.force)
    throw UsageError("output directory '" + cfg.out +
                     "' exists; pass --force to overwrite");
  fs::create_directories(cfg.out);
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  return out;
}

void write_json_file(const json& j, const fs::path& path) {
  open_out(path) << j.dump(2) << "\n";
}

// ---------------------------------------------------------------------------
// Preset defaults. Desk scale keeps every mechanism of the full experiments
// at a fraction of the samples/snapshots/epochs; --paper-scale restores the
// published sizes.

struct DataDefaults {
  SplitCounts split;
  int ntime = 0;
  double T = 0.0;
  bool store_rhs = false;
  bool allow_small = false;
};

DataDefaults data_defaults(const std::string& problem, bool paper) {
  if (problem == "test1-linear" || problem == "test1-nonlinear" ||
      problem == "test1-nonlinear-N100" || problem == "test1-nonlinear-N500") {
    // Same shape at both scales: the 3-dimensional tests are already small.
    return {{100, 25, 50}, 51, 0.5, true, false};
  }
  if (problem == "sir") {
    if (paper) return {{180, 60, 60}, 20001, 20.0, true, false};
    return {{60, 20, 20}, 401, 20.0, true, false};
  }
  if (problem == "chemistry") {
    // Published counts size val/test from the training set (200 + 10% + 10%),
    // which puts them below 10% of the total; that needs the explicit opt-in.
    if (paper) return {{200, 20, 20}, 100, 3.0, false, true};
    return {{100, 13, 13}, 101, 3.0, false, false};
  }
  throw UsageError("unknown problem preset '" + problem + "'");
}

struct TrainDefaults {
  int epochs = 0;
  int batch = 32;
  double lr = 1e-3;
  std::string milestones;
  std::string scheme = "fe";
  double conservation = 0.0;
};

TrainDefaults train_defaults(const std::string& problem, bool paper) {
  if (problem == "test1-linear") {
    if (paper) return {1000, 32, 1e-3, "501:1e-4", "fe", 0.0};
    return {300, 32, 1e-3, "201:1e-4", "fe", 0.0};
  }
  if (problem == "test1-nonlinear" || problem == "test1-nonlinear-N100" ||
      problem == "test1-nonlinear-N500") {
    if (paper) return {2000, 32, 1e-3, "1001:1e-4,1601:1e-5", "fe", 0.0};
    return {800, 32, 1e-3, "501:1e-4,701:1e-5", "fe", 0.0};
  }
  if (problem == "sir") {
    if (paper) return {2000, 32, 1e-3, "501:1e-4,1501:1e-5", "fe", 0.0};
    return {400, 32, 1e-3, "201:1e-4,351:1e-5", "fe", 0.0};
  }
  if (problem == "chemistry") {
    if (paper) return {3000, 32, 1e-3, "1501:1e-4,2501:1e-5", "ab2", 0.1};
    return {1500, 32, 1e-3, "751:1e-4,1251:1e-5", "ab2", 0.1};
  }
  throw UsageError("unknown problem preset '" + problem + "'");
}

// Proportional split when the sample count is overridden.
SplitCounts scaled_split(const SplitCounts& preset, int samples) {
  const double total = static_cast<double>(preset.total());
  int n_val = std::max(1, static_cast<int>(std::lround(samples * preset.n_val / total)));
  int n_test = std::max(1, static_cast<int>(std::lround(samples * preset.n_test / total)));
  if (n_val + n_test >= samples)
    throw UsageError("too few samples for a train/val/test split");
  return {samples - n_val - n_test, n_val, n_test};
}

TrajectoryDataset load_dataset_checked(const RunConfig& cfg) {
  if (cfg.dataset.empty())
    throw UsageError(cfg.subcommand + ": --dataset is required");
  TrajectoryDataset data = load_dataset(cfg.dataset);
  if (!cfg.problem.empty() && cfg.problem != data.problem_name)
    throw UsageError("dataset at '" + cfg.dataset + "' holds problem '" +
                     data.problem_name + "', not '" + cfg.problem + "'");
  return data;
}

ReducedModel load_bundle_checked(const RunConfig& cfg,
                                 const TrajectoryDataset& data) {
  if (cfg.bundle.empty())
    throw UsageError(cfg.subcommand + ": --bundle is required");
  ReducedModel model = load_bundle(cfg.bundle);
  if (model.problem.name != data.problem_name)
    throw UsageError("bundle was trained on '" + model.problem.name +
                     "' but the dataset holds '" + data.problem_name + "'");
  return model;
}

TrainConfig make_train_config(const RunConfig& cfg, const std::string& log_name) {
  TrainConfig tc;
  tc.epochs = cfg.epochs;
  tc.batch_size = cfg.batch;
  tc.lr.initial = cfg.lr;
  tc.lr.milestones = parse_milestones(cfg.lr_milestones);
  tc.seed = cfg.seed;
  tc.threads = std::max(1, cfg.threads);
  tc.weights.recon = cfg.eta1;
  tc.weights.residual = cfg.eta3;
  tc.weights.conservation = cfg.conservation;
  tc.weights.conservation_mass_defect = cfg.conservation_mass_defect;
  tc.weights.orthogonality = cfg.orthogonality;
  tc.weights.dissipativity = cfg.dissipativity;
  tc.weights.dissipativity_margin = cfg.dissipativity_margin;
  tc.log_path = (fs::path(cfg.out) / log_name).string();
  return tc;
}

void log_result(const std::string& phase, const TrainResult& r) {
  std::cerr << phase << ": final train loss " << r.final_train_loss
            << ", best val loss " << r.best_val_loss << " at epoch "
            << r.best_epoch << "\n";
}

// Evaluation grid: ceil so the horizon is reached or just passed.
long steps_for(double horizon, double dt) {
  if (!(dt > 0.0)) throw UsageError("dt must be positive");
  if (!(horizon > 0.0)) throw UsageError("evaluation horizon must be positive");
  return static_cast<long>(std::ceil(horizon / dt - 1e-9));
}

std::vector<Vector> encode_cloud(const Autoencoder& ae, const Matrix& rows) {
  std::vector<Vector> out;
  out.reserve(static_cast<std::size_t>(rows.rows()));
  for (Eigen::Index r = 0; r < rows.rows(); ++r)
    out.push_back(ae.encode(rows.row(r).transpose()));
  return out;
}

std::vector<Vector> to_rows(const Matrix& m) {
  std::vector<Vector> out;
  out.reserve(static_cast<std::size_t>(m.rows()));
  for (Eigen::Index r = 0; r < m.rows(); ++r) out.push_back(m.row(r).transpose());
  return out;
}

json lipschitz_json(const LipschitzReport& r) {
  return json{{"L", r.L}, {"nu", r.nu}, {"pairs", r.pairs}, {"domain", r.domain}};
}

}  // namespace

// ---------------------------------------------------------------------------

void cmd_generate(RunConfig cfg) {
  cfg.subcommand = "generate";
  if (cfg.problem.empty()) throw UsageError("generate: --problem is required");
  const OdeProblem problem = make_problem(cfg.problem);
  DataDefaults dd = data_defaults(cfg.problem, cfg.paper_scale);
  cfg.seed = resolve_seed(cfg);
  if (cfg.ntime > 0) dd.ntime = cfg.ntime;
  if (cfg.T > 0) dd.T = cfg.T;
  if (cfg.store_rhs) dd.store_rhs = true;
  if (cfg.samples > 0 && cfg.samples != dd.split.total()) {
    dd.split = scaled_split(dd.split, cfg.samples);
    dd.allow_small = true;  // the caller took control of the counts
  }
  cfg.samples = dd.split.total();
  cfg.ntime = dd.ntime;
  cfg.T = dd.T;
  cfg.store_rhs = dd.store_rhs;
  claim_out_dir(cfg);

  TrajectoryDataset data = generate_dataset(problem, dd.split, dd.ntime, dd.T,
                                            dd.store_rhs, cfg.seed, 1e-16, 1e-12,
                                            dd.allow_small);
  save_dataset(data, cfg.out);
  write_run_json(cfg, cfg.out);
  std::cerr << "generate: " << data.n_samples() << " samples ("
            << dd.split.n_train << "/" << dd.split.n_val << "/" << dd.split.n_test
            << "), " << data.n_time << " snapshots, dt " << data.dt << "\n";
}

void cmd_train(RunConfig cfg) {
  cfg.subcommand = "train";
  TrajectoryDataset data = load_dataset_checked(cfg);
  cfg.problem = data.problem_name;
  const OdeProblem problem = make_problem(data.problem_name);
  cfg.seed = resolve_seed(cfg);

  if (cfg.strategy != "exact-rhs" && cfg.strategy != "semi" && cfg.strategy != "fully")
    throw UsageError("train: unknown strategy '" + cfg.strategy +
                     "' (exact-rhs | semi | fully)");
  if (cfg.strategy == "semi" && !data.has_rhs)
    throw UsageError(
        "train: strategy 'semi' needs right-hand-side snapshots; regenerate the "
        "dataset with --store-rhs");
  if (cfg.shift != "none" && cfg.shift != "zero-initial")
    throw UsageError("train: unknown shift mode '" + cfg.shift + "'");
  if (!(cfg.ks > 0)) throw UsageError("train: ks must be positive");

  const TrainDefaults td = train_defaults(data.problem_name, cfg.paper_scale);
  if (cfg.epochs <= 0) cfg.epochs = td.epochs;
  if (cfg.batch <= 0) cfg.batch = td.batch;
  if (cfg.lr <= 0) cfg.lr = td.lr;
  if (cfg.lr_milestones.empty()) cfg.lr_milestones = td.milestones;
  if (cfg.scheme.empty()) cfg.scheme = td.scheme;
  if (cfg.conservation < 0) cfg.conservation = td.conservation;
  const SchemeSpec& scheme = SchemeSpec::by_name(cfg.scheme);
  if (cfg.strategy == "fully" && scheme.alpha.empty())
    throw UsageError("train: the fully data-driven residual needs a linear "
                     "multistep scheme (fe or ab2)");

  NetPreset preset = net_preset(data.problem_name, cfg.paper_scale);
  if (cfg.latent > 0 && cfg.latent != preset.latent) {
    const bool plain_linear =
        preset.encoder.size() == 1 && preset.decoder.size() == 1 &&
        preset.encoder[0].kind == LayerKind::Linear &&
        preset.decoder[0].kind == LayerKind::Linear &&
        preset.encoder[0].act == Activation::Identity && preset.fn.empty();
    if (!plain_linear)
      throw UsageError("train: --latent can resize only the plain linear "
                       "autoencoder presets");
    const int N = preset.encoder[0].in;
    if (cfg.latent >= N)
      throw UsageError("train: latent size must stay below the full dimension");
    preset.encoder = {{LayerKind::Linear, N, cfg.latent, Activation::Identity}};
    preset.decoder = {{LayerKind::Linear, cfg.latent, N, Activation::Identity}};
    preset.latent = cfg.latent;
  }
  cfg.latent = preset.latent;
  if (cfg.strategy != "exact-rhs" && preset.fn.empty())
    throw UsageError("train: preset '" + data.problem_name +
                     "' has no reduced-rhs network; use strategy exact-rhs");

  claim_out_dir(cfg);

  Autoencoder ae;
  ae.encoder = Mlp(preset.encoder, derive_seed(cfg.seed, 101));
  ae.decoder = Mlp(preset.decoder, derive_seed(cfg.seed, 102));
  ae.norm = Normalization::fit(data.train_snapshots());
  ae.Ks = cfg.ks;
  ae.validate();

  ReducedModel model;
  model.problem = problem;
  model.dt_train = data.dt;
  model.scheme_name = cfg.scheme;
  model.shift_mode = cfg.shift == "zero-initial" ? ShiftMode::ZeroInitial
                                                 : ShiftMode::None;

  if (cfg.strategy == "exact-rhs") {
    log_result("autoencoder",
               train_autoencoder(ae, data, problem, make_train_config(cfg, "train_log.csv")));
    model.ae = ae;
    model.mode = RhsMode::Exact;
  } else if (cfg.strategy == "semi") {
    Mlp fn(preset.fn, derive_seed(cfg.seed, 103));
    log_result("autoencoder",
               train_autoencoder(ae, data, problem, make_train_config(cfg, "train_log.csv")));
    log_result("reduced rhs",
               train_semi(fn, ae, data, problem, make_train_config(cfg, "train_fn_log.csv")));
    model.ae = ae;
    model.mode = RhsMode::Learned;
    model.fn = std::move(fn);
  } else {
    Mlp fn(preset.fn, derive_seed(cfg.seed, 103));
    log_result("joint", train_fully(ae, fn, data, problem, scheme,
                                    make_train_config(cfg, "train_log.csv")));
    model.ae = ae;
    model.mode = RhsMode::Learned;
    model.fn = std::move(fn);
  }

  save_bundle(model, cfg.out);
  write_run_json(cfg, cfg.out);
}

void cmd_evaluate(RunConfig cfg) {
  cfg.subcommand = "evaluate";
  TrajectoryDataset data = load_dataset_checked(cfg);
  cfg.problem = data.problem_name;
  ReducedModel model = load_bundle_checked(cfg, data);
  cfg.seed = resolve_seed(cfg);

  if (cfg.dt <= 0) cfg.dt = data.dt;
  if (cfg.T_query <= 0) {
    // Chemistry is queried beyond its training window by default.
    cfg.T_query = cfg.T > 0 ? cfg.T
                  : data.problem_name == "chemistry" ? 2.0 * data.T
                                                     : data.T;
  }
  const std::string scheme_name = cfg.scheme.empty() ? model.scheme_name : cfg.scheme;
  cfg.scheme = scheme_name;
  const SchemeSpec& scheme = SchemeSpec::by_name(scheme_name);
  const long K = steps_for(cfg.T_query, cfg.dt);
  claim_out_dir(cfg);

  std::vector<double> times(static_cast<std::size_t>(K) + 1);
  for (long j = 0; j <= K; ++j) times[static_cast<std::size_t>(j)] = cfg.dt * j;

  std::vector<Matrix> refs, recs;
  std::vector<int> diverged;
  double max_abs_final = 0.0;
  for (std::size_t i = 0; i < data.test_idx.size(); ++i) {
    const int s = data.test_idx[i];
    const Vector& mu = data.mus[s];
    Matrix rec;
    try {
      rec = model.solve_reconstructed(mu, FixedGrid(cfg.dt, K), scheme);
    } catch (const DivergenceError& e) {
      std::cerr << "evaluate: test sample " << s << " diverged at step "
                << e.step << " (t = " << e.t << ")\n";
      diverged.push_back(s);
      continue;
    }
    const Vector u0 = model.problem.initial(mu);
    const Matrix ref = integrate_reference(model.problem.rhs_at(mu), u0, 0.0,
                                           times.back(), 1e-16, 1e-12)
                           .sample_grid(cfg.dt, K);
    max_abs_final =
        std::max(max_abs_final, rec.row(K).cwiseAbs().maxCoeff());

    auto traj = open_out(fs::path(cfg.out) / ("traj_" + std::to_string(s) + ".csv"));
    traj << "t";
    for (int c = 0; c < data.dim(); ++c) traj << ",ref_" << (c + 1);
    for (int c = 0; c < data.dim(); ++c) traj << ",rec_" << (c + 1);
    traj << "\n";
    for (long j = 0; j <= K; ++j) {
      traj << g17(times[static_cast<std::size_t>(j)]);
      for (int c = 0; c < data.dim(); ++c) traj << "," << g17(ref(j, c));
      for (int c = 0; c < data.dim(); ++c) traj << "," << g17(rec(j, c));
      traj << "\n";
    }
    refs.push_back(ref);
    recs.push_back(rec);
  }

  json summary;
  summary["scheme"] = scheme_name;
  summary["dt"] = cfg.dt;
  summary["horizon"] = cfg.T_query;
  summary["t_final"] = times.back();
  summary["n_test"] = data.test_idx.size();
  summary["n_diverged"] = diverged.size();
  summary["diverged_samples"] = diverged;
  if (!refs.empty()) {
    const Vector rel = error_ave_rel(refs, recs);
    const Vector con = error_ave_con(refs, recs);
    summary["e_multi"] = error_multi(refs, recs);
    summary["max_abs_final"] = max_abs_final;
    auto err = open_out(fs::path(cfg.out) / "errors.csv");
    err << "t,e_ave_rel,e_ave_con\n";
    for (long j = 0; j <= K; ++j)
      err << g17(times[static_cast<std::size_t>(j)]) << "," << g17(rel(j)) << ","
          << g17(con(j)) << "\n";
  }
  write_json_file(summary, fs::path(cfg.out) / "summary.json");
  write_run_json(cfg, cfg.out);
  std::cerr << "evaluate: " << refs.size() << "/" << data.test_idx.size()
            << " test trajectories on dt " << cfg.dt << " to t " << times.back()
            << "\n";
}

void cmd_converge(RunConfig cfg) {
  cfg.subcommand = "converge";
  TrajectoryDataset data = load_dataset_checked(cfg);
  cfg.problem = data.problem_name;
  ReducedModel model = load_bundle_checked(cfg, data);
  cfg.seed = resolve_seed(cfg);
  if (cfg.s_min > cfg.s_max) throw UsageError("converge: s_min must be <= s_max");
  if (cfg.T <= 0) cfg.T = data.T;

  std::vector<std::string> scheme_names;
  {
    std::istringstream in(cfg.schemes);
    std::string tok;
    while (std::getline(in, tok, ',')) {
      if (!tok.empty()) scheme_names.push_back(tok);
    }
    if (scheme_names.empty()) throw UsageError("converge: --schemes is empty");
    for (const std::string& s : scheme_names) SchemeSpec::by_name(s);  // validate
  }
  claim_out_dir(cfg);

  json slopes;
  for (const std::string& name : scheme_names) {
    const SchemeSpec& scheme = SchemeSpec::by_name(name);
    SweepConfig sc;
    sc.dt_base = data.dt;
    sc.s_min = cfg.s_min;
    sc.s_max = cfg.s_max;
    sc.T = cfg.T;
    sc.expected_order = scheme.order;

    const auto solve = [&](std::size_t sample, double dt, long K) {
      const int s = data.test_idx[sample];
      return model.solve_reconstructed(data.mus[s], FixedGrid(dt, K), scheme);
    };
    const auto reference = [&](std::size_t sample, const std::vector<double>& ts) {
      const int s = data.test_idx[sample];
      const Vector u0 = model.problem.initial(data.mus[s]);
      Matrix out(static_cast<Eigen::Index>(ts.size()), data.dim());
      const DenseSolution sol = integrate_reference(
          model.problem.rhs_at(data.mus[s]), u0, 0.0, ts.back(), 1e-16, 1e-12);
      for (std::size_t j = 0; j < ts.size(); ++j)
        out.row(static_cast<Eigen::Index>(j)) = sol.sample(ts[j]).transpose();
      return out;
    };

    try {
      const SweepResult res =
          convergence_sweep(data.test_idx.size(), solve, reference, sc);
      auto csv = open_out(fs::path(cfg.out) / ("converge_" + name + ".csv"));
      csv << "scheme,dt,steps,e_multi,diverged\n";
      for (const SweepRow& row : res.rows)
        csv << name << "," << g17(row.dt) << "," << row.steps << ","
            << g17(row.e_multi) << "," << (row.diverged ? 1 : 0) << "\n";
      slopes[name] = {{"fitted_slope", res.fitted_slope},
                      {"fit_points", res.fit_points},
                      {"expected_order", scheme.order},
                      {"eval_points", res.eval_times.size()}};
      std::cerr << "converge: " << name << " slope " << res.fitted_slope
                << " over " << res.fit_points << " points\n";
    } catch (const std::exception& e) {
      // One scheme failing (e.g. every step size diverged) must not take
      // down the remaining sweeps.
      std::cerr << "converge: scheme " << name << " failed: " << e.what() << "\n";
      slopes[name] = {{"error", e.what()}};
    }
  }
  write_json_file(slopes, fs::path(cfg.out) / "slopes.json");
  write_run_json(cfg, cfg.out);
}

void cmd_stability(RunConfig cfg) {
  cfg.subcommand = "stability";
  TrajectoryDataset data = load_dataset_checked(cfg);
  cfg.problem = data.problem_name;
  ReducedModel model = load_bundle_checked(cfg, data);
  cfg.seed = resolve_seed(cfg);
  if (!(cfg.ks > 0)) throw UsageError("stability: ks must be positive");

  // Scaling for this run: exact-mode bundles can be moved to any frame, a
  // learned rhs is tied to its training frame.
  ReducedModel base = model;
  if (model.mode == RhsMode::Exact) {
    base = with_scaling(model, 1.0);
    model = with_scaling(model, cfg.ks);
  } else if (cfg.ks != model.ae.Ks) {
    throw UsageError("stability: a learned-rhs bundle is tied to its training "
                     "scaling K_s = " + std::to_string(model.ae.Ks));
  }

  if (cfg.dt <= 0) cfg.dt = data.dt;
  if (cfg.T <= 0) cfg.T = data.T;
  const std::string scheme_name = cfg.scheme.empty() ? model.scheme_name : cfg.scheme;
  cfg.scheme = scheme_name;
  const SchemeSpec& scheme = SchemeSpec::by_name(scheme_name);
  const long K = steps_for(cfg.T, cfg.dt);
  claim_out_dir(cfg);

  // Point clouds from the test split: raw states for encoder constants,
  // their (base-frame) encodings for decoder and reduced-rhs constants.
  std::vector<Vector> state_cloud, latent_cloud;
  for (int s : data.test_idx) {
    for (const Vector& u : to_rows(data.states[s])) {
      state_cloud.push_back(u);
      latent_cloud.push_back(base.ae.encode(u));
    }
  }

  const LipschitzReport enc_rep = estimate_lipschitz(
      [&](const Vector& u) { return base.ae.encode(u); }, state_cloud, 2000,
      derive_seed(cfg.seed, 11), "encoder on test states");
  const LipschitzReport dec_rep = estimate_lipschitz(
      [&](const Vector& z) { return base.ae.decode(z); }, latent_cloud, 2000,
      derive_seed(cfg.seed, 12), "decoder on encoded test states");

  // Reduced rhs constants per test parameter; the aggregate takes the worst
  // sample (largest L, least negative nu).
  json per_sample = json::array();
  double L_hat = 0.0, nu_hat = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < data.test_idx.size(); ++i) {
    const int s = data.test_idx[i];
    const Rhs f = base.reduced_rhs(data.mus[s]);
    const LipschitzReport rep = estimate_lipschitz(
        [&](const Vector& z) { return f(0.0, z); },
        encode_cloud(base.ae, data.states[s]), 2000,
        derive_seed(cfg.seed, 20 + static_cast<std::uint64_t>(i)),
        "reduced rhs, test sample " + std::to_string(s));
    L_hat = std::max(L_hat, rep.L);
    nu_hat = std::max(nu_hat, rep.nu);
    per_sample.push_back({{"sample", s},
                          {"L", rep.L},
                          {"nu", rep.nu},
                          {"pairs", rep.pairs}});
  }

  json report;
  report["ks"] = model.ae.Ks;
  report["encoder"] = lipschitz_json(enc_rep);
  report["decoder"] = lipschitz_json(dec_rep);
  report["reduced_rhs"] = {{"L_hat", L_hat}, {"nu_hat", nu_hat}};
  report["per_sample"] = per_sample;
  if (nu_hat < 0 && L_hat > 0)
    report["b_stability_dt_bound"] = b_stability_dt_bound(L_hat, nu_hat);
  else
    report["b_stability_dt_bound"] = nullptr;
  if (model.problem.is_linear) {
    Eigen::EigenSolver<Matrix> eig(model.problem.A);
    std::vector<std::complex<double>> spectrum(
        eig.eigenvalues().data(),
        eig.eigenvalues().data() + eig.eigenvalues().size());
    report["fe_full_dt_bound"] = fe_stability_max_dt(spectrum);
  }

  // Perturbation experiment: bound and error curves for the first n_mu test
  // parameters whenever any perturbation is switched on.
  const bool perturbing = cfg.big_delta0 != 0.0 || cfg.delta0 != 0.0 ||
                          cfg.big_delta_lo != 0.0 || cfg.big_delta_hi != 0.0 ||
                          cfg.delta_lo != 0.0 || cfg.delta_hi != 0.0;
  if (perturbing) {
    LyapunovInputs constants;
    constants.L_psi = dec_rep.L;
    constants.L_psi_prime = enc_rep.L;
    constants.M_jac = enc_rep.L;
    constants.L_fn = L_hat;

    json curves = json::array();
    const int n_mu = std::min<int>(cfg.n_mu, static_cast<int>(data.test_idx.size()));
    for (int i = 0; i < n_mu; ++i) {
      const int s = data.test_idx[static_cast<std::size_t>(i)];
      PerturbationSpec pert;
      if (cfg.big_delta0 != 0.0)
        pert.Delta0 = Vector::Constant(data.dim(), cfg.big_delta0);
      if (cfg.delta0 != 0.0)
        pert.delta0 = Vector::Constant(model.ae.latent_dim(), cfg.delta0);
      pert.Delta_lo = cfg.big_delta_lo;
      pert.Delta_hi = cfg.big_delta_hi;
      pert.delta_lo = cfg.delta_lo;
      pert.delta_hi = cfg.delta_hi;
      // Seeded per sample, independent of K_s so scaling comparisons see
      // identical draws.
      pert.seed = derive_seed(cfg.seed, 300 + static_cast<std::uint64_t>(i));

      const BoundReport rep = perturbed_integrate(
          model, data.mus[s], FixedGrid(cfg.dt, K), scheme, pert, constants);
      const std::string csv_name = "bound_" + std::to_string(s) + ".csv";
      auto csv = open_out(fs::path(cfg.out) / csv_name);
      csv << "t,bound,error\n";
      const Eigen::Index n_rows = rep.error.size();
      for (Eigen::Index j = 0; j < static_cast<Eigen::Index>(rep.times.size()); ++j) {
        csv << g17(rep.times[static_cast<std::size_t>(j)]) << ","
            << g17(rep.bound(j)) << ",";
        if (j < n_rows)
          csv << g17(rep.error(j));
        else
          csv << "nan";  // past the divergence point
        csv << "\n";
      }
      curves.push_back({{"sample", s},
                        {"csv", csv_name},
                        {"diverged", rep.diverged},
                        {"divergence_step", rep.divergence_step},
                        {"realized_Delta0", rep.realized_Delta0},
                        {"realized_delta0", rep.realized_delta0},
                        {"realized_Delta_sup", rep.realized_Delta_sup},
                        {"realized_delta_sup", rep.realized_delta_sup}});
      if (rep.diverged)
        std::cerr << "stability: perturbed run for sample " << s
                  << " diverged at step " << rep.divergence_step << "\n";
    }
    report["constants"] = {{"L_psi", constants.L_psi},
                           {"L_psi_prime", constants.L_psi_prime},
                           {"M_jac", constants.M_jac},
                           {"L_fn", constants.L_fn}};
    report["bounds"] = curves;
  }

  write_json_file(report, fs::path(cfg.out) / "stability.json");
  write_run_json(cfg, cfg.out);
  std::cerr << "stability: L_hat " << L_hat << ", nu_hat " << nu_hat << "\n";
}

void cmd_manifold(RunConfig cfg) {
  cfg.subcommand = "manifold";
  if (cfg.manifold.empty() && !cfg.problem.empty()) cfg.manifold = cfg.problem;
  if (cfg.manifold.empty()) throw UsageError("manifold: --manifold is required");
  const StaticManifold manifold = make_manifold(cfg.manifold);
  cfg.seed = resolve_seed(cfg);
  if (cfg.count <= 0) cfg.count = cfg.paper_scale ? 2000 : 400;
  if (cfg.epochs <= 0) cfg.epochs = cfg.paper_scale ? 3000 : 600;
  if (cfg.batch <= 0) cfg.batch = 32;
  if (cfg.lr <= 0) cfg.lr = 1e-3;
  if (cfg.lr_milestones.empty())
    cfg.lr_milestones = cfg.paper_scale ? "2001:1e-4" : "401:1e-4";
  claim_out_dir(cfg);

  const Matrix cloud = manifold.sample(cfg.count, cfg.seed);

  // Recast the cloud as a dataset of two-point trajectories so the
  // autoencoder trainer applies unchanged; the pairing is irrelevant because
  // reconstruction treats snapshots independently.
  TrajectoryDataset shim;
  shim.problem_name = cfg.manifold;
  shim.seed = cfg.seed;
  shim.dt = 1.0;
  shim.T = 1.0;
  shim.n_time = 2;
  const int n_pairs = cfg.count / 2;
  if (n_pairs < 10) throw UsageError("manifold: need at least 20 points");
  std::vector<int> order(static_cast<std::size_t>(cfg.count));
  for (int i = 0; i < cfg.count; ++i) order[static_cast<std::size_t>(i)] = i;
  {
    std::mt19937_64 rng(derive_seed(cfg.seed, 7));
    for (int i = cfg.count - 1; i > 0; --i) {
      const int j = static_cast<int>(rng() % static_cast<std::uint64_t>(i + 1));
      std::swap(order[static_cast<std::size_t>(i)], order[static_cast<std::size_t>(j)]);
    }
  }
  for (int p = 0; p < n_pairs; ++p) {
    Matrix traj(2, manifold.ambient_dim);
    traj.row(0) = cloud.row(order[static_cast<std::size_t>(2 * p)]);
    traj.row(1) = cloud.row(order[static_cast<std::size_t>(2 * p + 1)]);
    shim.states.push_back(traj);
    shim.mus.emplace_back(Vector());
  }
  const int n_val = std::max(1, n_pairs / 10);
  const int n_test = std::max(1, n_pairs / 10);
  for (int p = 0; p < n_pairs; ++p) {
    if (p < n_pairs - n_val - n_test)
      shim.train_idx.push_back(p);
    else if (p < n_pairs - n_test)
      shim.val_idx.push_back(p);
    else
      shim.test_idx.push_back(p);
  }

  NetPreset preset = net_preset(cfg.manifold, cfg.paper_scale);
  if (cfg.latent > 0 && cfg.latent != preset.latent) {
    if (cfg.latent >= manifold.ambient_dim)
      throw UsageError("manifold: latent size must stay below the ambient dimension");
    // The reduction happens at the last encoder layer and the expansion at
    // the first decoder layer; resizing those two keeps the preset shape.
    preset.encoder.back().out = cfg.latent;
    preset.decoder.front().in = cfg.latent;
    preset.latent = cfg.latent;
  }
  cfg.latent = preset.latent;

  Autoencoder ae;
  ae.encoder = Mlp(preset.encoder, derive_seed(cfg.seed, 101));
  ae.decoder = Mlp(preset.decoder, derive_seed(cfg.seed, 102));
  ae.norm = Normalization::fit(shim.train_snapshots());
  ae.Ks = cfg.ks;
  ae.validate();

  OdeProblem dummy;
  dummy.name = cfg.manifold;
  dummy.dim = manifold.ambient_dim;
  const TrainResult result =
      train_autoencoder(ae, shim, dummy, make_train_config(cfg, "train_log.csv"));
  log_result("autoencoder", result);

  auto recon_csv = open_out(fs::path(cfg.out) / "recon.csv");
  recon_csv << "x,y,z,xr,yr,zr,err\n";
  double mean_err = 0.0, max_err = 0.0;
  for (Eigen::Index r = 0; r < cloud.rows(); ++r) {
    const Vector u = cloud.row(r).transpose();
    const Vector v = ae.reconstruct(u);
    const double err = (u - v).norm();
    mean_err += err;
    max_err = std::max(max_err, err);
    recon_csv << g17(u(0)) << "," << g17(u(1)) << "," << g17(u(2)) << ","
              << g17(v(0)) << "," << g17(v(1)) << "," << g17(v(2)) << ","
              << g17(err) << "\n";
  }
  mean_err /= static_cast<double>(cloud.rows());

  json summary;
  summary["manifold"] = cfg.manifold;
  summary["count"] = cfg.count;
  summary["latent"] = preset.latent;
  summary["mean_recon_error"] = mean_err;
  summary["max_recon_error"] = max_err;
  summary["final_train_loss"] = result.final_train_loss;
  summary["best_val_loss"] = result.best_val_loss;
  write_json_file(summary, fs::path(cfg.out) / "summary.json");
  write_run_json(cfg, cfg.out);
  std::cerr << "manifold: mean reconstruction error " << mean_err << ", max "
            << max_err << "\n";
}

void run_command(const RunConfig& cfg) {
  if (cfg.subcommand == "generate") return cmd_generate(cfg);
  if (cfg.subcommand == "train") return cmd_train(cfg);
  if (cfg.subcommand == "evaluate") return cmd_evaluate(cfg);
  if (cfg.subcommand == "converge") return cmd_converge(cfg);
  if (cfg.subcommand == "stability") return cmd_stability(cfg);
  if (cfg.subcommand == "manifold") return cmd_manifold(cfg);
  throw UsageError("unknown subcommand '" + cfg.subcommand + "'");
}

}  // namespace dre
