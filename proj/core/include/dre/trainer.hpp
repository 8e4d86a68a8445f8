#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dre/dataset.hpp"
#include "dre/losses.hpp"

namespace dre {

/// Piecewise-constant learning rate: `initial` until the first milestone,
/// then each milestone's rate from its (1-based) epoch onward.
struct LrSchedule {
  double initial = 1e-3;
  std::vector<std::pair<int, double>> milestones;  // (epoch_from, lr), ascending

  double at(int epoch) const {
    double lr = initial;
    for (const auto& [from, value] : milestones) {
      if (epoch >= from) lr = value;
    }
    return lr;
  }
};

/// Relative weights of the loss terms that can enter a training objective.
/// recon and residual play the roles of eta_1 and eta_3 in the combined
/// objective of the fully data-driven strategy.
struct LossWeights {
  double recon = 1.0;
  double residual = 1.0;
  double conservation = 0.0;
  bool conservation_mass_defect = false;
  double orthogonality = 0.0;
  double dissipativity = 0.0;
  double dissipativity_margin = 0.0;
};

struct TrainConfig {
  int epochs = 100;
  int batch_size = 32;
  LrSchedule lr;
  std::uint64_t seed = 0;
  int threads = 1;
  LossWeights weights;
  std::string log_path;  // CSV training log; empty disables logging
};

struct TrainLogRow {
  int epoch = 0;  // 1-based
  double train_loss = 0.0;
  double val_loss = 0.0;
  double lr = 0.0;
  double wall_time_s = 0.0;
};

struct TrainResult {
  int best_epoch = 0;
  double best_val_loss = 0.0;
  double final_train_loss = 0.0;
  std::vector<TrainLogRow> log;
};

/// Trains encoder and decoder on the training snapshots with the
/// reconstruction loss plus any conservation/orthogonality terms enabled in
/// cfg.weights. Adam, seeded shuffles, best-validation parameters restored
/// on return. Training is bit-identical for any cfg.threads.
TrainResult train_autoencoder(Autoencoder& ae, const TrajectoryDataset& data,
                              const OdeProblem& problem, const TrainConfig& cfg);

/// Second phase of the semi data-driven strategy: the autoencoder is frozen
/// and fn learns the projected right-hand side from stored F_N values.
/// Inputs and targets are precomputed once (they cannot change while the
/// autoencoder is frozen). Requires data.has_rhs.
TrainResult train_semi(Mlp& fn, const Autoencoder& ae,
                       const TrajectoryDataset& data, const OdeProblem& problem,
                       const TrainConfig& cfg);

/// Fully data-driven strategy: encoder, decoder and fn train together on
/// time windows of the multistep scheme. Each window couples
///   recon  : mean reconstruction error over its P+1 snapshots (weight recon),
///   residual: the multistep residual at the window (weight residual),
/// plus optional conservation over the snapshots. The encoder enters the
/// residual as a value only (stop-gradient), so the residual trains fn alone
/// while the reconstruction terms train the autoencoder.
TrainResult train_fully(Autoencoder& ae, Mlp& fn, const TrajectoryDataset& data,
                        const OdeProblem& problem, const SchemeSpec& scheme,
                        const TrainConfig& cfg);

}  // namespace dre
