// Command line front end of the experiment runner.
//
// Configuration precedence: a --config file (TOML, or a previous run.json to
// repeat a run) supplies base values, explicit flags override them, and the
// DRE_SEED environment variable overrides the seed last.

#include <functional>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "dre/experiments.hpp"

namespace {

// Collects "copy this flag into the config if it was passed" steps so the
// config file can be loaded first and flags applied on top.
struct Binder {
  dre::RunConfig& staged;
  std::vector<std::function<void(dre::RunConfig&)>> appliers;

  template <typename T>
  void option(CLI::App* cmd, const std::string& name, T dre::RunConfig::*member,
              const std::string& help) {
    CLI::Option* opt = cmd->add_option(name, staged.*member, help);
    appliers.push_back([opt, member, this](dre::RunConfig& cfg) {
      if (opt->count() > 0) cfg.*member = staged.*member;
    });
  }

  void flag(CLI::App* cmd, const std::string& name, bool dre::RunConfig::*member,
            const std::string& help) {
    CLI::Option* opt = cmd->add_flag(name, staged.*member, help);
    appliers.push_back([opt, member, this](dre::RunConfig& cfg) {
      if (opt->count() > 0) cfg.*member = staged.*member;
    });
  }

  void apply(dre::RunConfig& cfg) const {
    for (const auto& f : appliers) f(cfg);
  }
};

void add_common(Binder& b, CLI::App* cmd) {
  using RC = dre::RunConfig;
  b.option(cmd, "--out", &RC::out, "Output directory (required)");
  b.option(cmd, "--seed", &RC::seed, "Base seed (DRE_SEED overrides)");
  b.option(cmd, "--threads", &RC::threads, "Worker thread cap");
  b.flag(cmd, "--paper-scale", &RC::paper_scale,
         "Full published experiment sizes instead of the desk-scale defaults");
  b.flag(cmd, "--force", &RC::force, "Overwrite an existing output directory");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Reduced embeddings for parametric ODEs: autoencoder reduction, exact "
      "and learned latent dynamics, and the experiment suite around them"};
  app.require_subcommand(1);

  dre::RunConfig staged;
  Binder b{staged, {}};
  std::string config_path;
  using RC = dre::RunConfig;

  CLI::App* gen = app.add_subcommand("generate", "Integrate reference trajectories into a dataset");
  CLI::App* train = app.add_subcommand("train", "Train a reduction on a dataset");
  CLI::App* eval = app.add_subcommand("evaluate", "Reconstruct test trajectories and write error curves");
  CLI::App* conv = app.add_subcommand("converge", "Step-size sweep with slope fits");
  CLI::App* stab = app.add_subcommand("stability", "Lipschitz estimates, step bounds and perturbation curves");
  CLI::App* mani = app.add_subcommand("manifold", "Autoencoder study on a static point cloud");

  for (CLI::App* cmd : {gen, train, eval, conv, stab, mani}) {
    cmd->add_option("--config", config_path,
                    "TOML config or a previous run.json; flags override it");
    add_common(b, cmd);
  }

  b.option(gen, "--problem", &RC::problem, "Problem preset name");
  b.option(gen, "--samples", &RC::samples, "Total sample count (split proportionally)");
  b.option(gen, "--ntime", &RC::ntime, "Snapshots per trajectory");
  b.option(gen, "--T", &RC::T, "Trajectory horizon");
  b.flag(gen, "--store-rhs", &RC::store_rhs, "Store F_N at every snapshot (needed by strategy semi)");

  b.option(train, "--dataset", &RC::dataset, "Dataset directory (required)");
  b.option(train, "--problem", &RC::problem, "Problem preset (checked against the dataset)");
  b.option(train, "--strategy", &RC::strategy, "exact-rhs | semi | fully");
  b.option(train, "--scheme", &RC::scheme, "Residual/evaluation scheme: fe | ab2 | rk4");
  b.option(train, "--shift", &RC::shift, "Latent shift mode: none | zero-initial");
  b.option(train, "--ks", &RC::ks, "Latent scaling factor K_s");
  b.option(train, "--latent", &RC::latent, "Latent size override (linear presets only)");
  b.option(train, "--epochs", &RC::epochs, "Training epochs");
  b.option(train, "--batch", &RC::batch, "Minibatch size");
  b.option(train, "--lr", &RC::lr, "Initial learning rate");
  b.option(train, "--lr-milestones", &RC::lr_milestones,
           "Schedule \"epoch:lr,epoch:lr\" (1-based epochs)");
  b.option(train, "--eta1", &RC::eta1, "Reconstruction loss weight");
  b.option(train, "--eta3", &RC::eta3, "Residual loss weight (strategy fully)");
  b.option(train, "--conservation", &RC::conservation, "Conservation loss weight");
  b.flag(train, "--conservation-mass-defect", &RC::conservation_mass_defect,
         "Penalize the summed defect instead of componentwise deviations");
  b.option(train, "--orthogonality", &RC::orthogonality,
           "Orthogonality loss weight (single-linear-layer autoencoders)");
  b.option(train, "--dissipativity", &RC::dissipativity,
           "Dissipativity hinge weight (strategy semi, experimental)");
  b.option(train, "--dissipativity-margin", &RC::dissipativity_margin,
           "Margin of the dissipativity hinge");

  for (CLI::App* cmd : {eval, conv, stab}) {
    b.option(cmd, "--dataset", &RC::dataset, "Dataset directory (required)");
    b.option(cmd, "--bundle", &RC::bundle, "Model bundle directory (required)");
    b.option(cmd, "--problem", &RC::problem, "Problem preset (checked against the dataset)");
    b.option(cmd, "--scheme", &RC::scheme, "Integration scheme (default: the bundle's)");
  }
  b.option(eval, "--dt", &RC::dt, "Step size (default: the dataset's)");
  b.option(eval, "--T-query", &RC::T_query,
           "Evaluation horizon (chemistry defaults to twice the training window)");
  b.option(eval, "--T", &RC::T, "Alias horizon; --T-query wins when both are set");

  b.option(conv, "--s-min", &RC::s_min, "Smallest exponent of dt = dt_train * 2^s");
  b.option(conv, "--s-max", &RC::s_max, "Largest exponent of dt = dt_train * 2^s");
  b.option(conv, "--schemes", &RC::schemes, "Comma list of schemes to sweep");
  b.option(conv, "--T", &RC::T, "Sweep horizon (default: the dataset's)");

  b.option(stab, "--dt", &RC::dt, "Step size of the perturbed runs");
  b.option(stab, "--T", &RC::T, "Horizon of the perturbed runs");
  b.option(stab, "--ks", &RC::ks, "Latent scaling applied to exact-mode bundles for this run");
  b.option(stab, "--delta0", &RC::delta0, "Initial latent offset per component");
  b.option(stab, "--Delta0", &RC::big_delta0, "Initial full-state offset per component");
  b.option(stab, "--delta-lo", &RC::delta_lo, "Latent rhs perturbation, lower bound");
  b.option(stab, "--delta-hi", &RC::delta_hi, "Latent rhs perturbation, upper bound");
  b.option(stab, "--Delta-lo", &RC::big_delta_lo, "Full-state rhs perturbation, lower bound");
  b.option(stab, "--Delta-hi", &RC::big_delta_hi, "Full-state rhs perturbation, upper bound");
  b.option(stab, "--n-mu", &RC::n_mu, "Number of test parameters to run bound curves for");

  b.option(mani, "--manifold", &RC::manifold, "flat-line | graph | coil | noisy-coil");
  b.option(mani, "--count", &RC::count, "Cloud size");
  b.option(mani, "--latent", &RC::latent, "Latent size override");
  b.option(mani, "--ks", &RC::ks, "Latent scaling factor K_s");
  b.option(mani, "--epochs", &RC::epochs, "Training epochs");
  b.option(mani, "--batch", &RC::batch, "Minibatch size");
  b.option(mani, "--lr", &RC::lr, "Initial learning rate");
  b.option(mani, "--lr-milestones", &RC::lr_milestones, "Schedule \"epoch:lr,...\"");
  b.option(mani, "--orthogonality", &RC::orthogonality,
           "Orthogonality loss weight (with --latent on flat-line)");

  CLI11_PARSE(app, argc, argv);

  try {
    dre::RunConfig cfg;
    if (!config_path.empty()) cfg = dre::load_run_config(config_path);
    b.apply(cfg);
    for (CLI::App* cmd : {gen, train, eval, conv, stab, mani}) {
      if (app.got_subcommand(cmd)) cfg.subcommand = cmd->get_name();
    }
    dre::run_command(cfg);
  } catch (const dre::UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
