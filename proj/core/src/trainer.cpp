#include "dre/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <limits>
#include <numeric>
#include <random>
#include <stdexcept>
#include <thread>
#include <utility>

#include "dre/adam.hpp"

namespace dre {
namespace {

// Uniform draw in [0, n) by rejection, so shuffles do not depend on the
// standard library's distribution implementation.
std::size_t bounded_rand(std::mt19937_64& rng, std::size_t n) {
  const std::uint64_t max = std::numeric_limits<std::uint64_t>::max();
  const std::uint64_t limit = max - max % n;
  std::uint64_t x;
  do {
    x = rng();
  } while (x >= limit);
  return static_cast<std::size_t>(x % n);
}

void shuffle_indices(std::vector<std::size_t>& v, std::mt19937_64& rng) {
  for (std::size_t i = v.size(); i > 1; --i) {
    std::swap(v[i - 1], v[bounded_rand(rng, i)]);
  }
}

using ItemFn = std::function<double(std::size_t item, LossGrads* grads)>;

// Evaluates one minibatch into per-item slots (possibly from several
// threads; each item touches only its own slot) and reduces the slots with
// a pairwise tree sum in item order. The result is therefore bit-identical
// for every thread count. Returns the sum of item losses; `grads` gets the
// summed gradients.
double evaluate_batch(const ItemFn& item_fn,
                      const std::vector<std::size_t>& order, std::size_t begin,
                      std::size_t end, int threads, LossGrads& grads) {
  const std::size_t count = end - begin;
  std::vector<double> losses(count, 0.0);
  std::vector<LossGrads> slots(count);

  const auto work = [&](std::size_t lo, std::size_t hi) {
    for (std::size_t i = lo; i < hi; ++i) {
      losses[i] = item_fn(order[begin + i], &slots[i]);
    }
  };

  const std::size_t nt =
      std::min<std::size_t>(std::max(threads, 1), count);
  if (nt <= 1) {
    work(0, count);
  } else {
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(nt);
    for (std::size_t k = 0; k < nt; ++k) {
      const std::size_t lo = count * k / nt, hi = count * (k + 1) / nt;
      pool.emplace_back([&, k, lo, hi] {
        try {
          work(lo, hi);
        } catch (...) {
          errors[k] = std::current_exception();
        }
      });
    }
    for (auto& th : pool) th.join();
    for (const auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
  }

  grads = tree_sum(slots);
  return tree_sum(losses);
}

struct TrainingDriver {
  const TrainConfig& cfg;
  std::size_t n_items = 0;
  ItemFn train_item;
  std::function<double()> validation;
  std::function<void(const LossGrads&, double lr)> apply;
  std::function<void()> snapshot_best;
  std::function<void()> restore_best;

  TrainResult run() const {
    if (cfg.epochs < 1) throw std::invalid_argument("training needs epochs >= 1");
    if (cfg.batch_size < 1) throw std::invalid_argument("training needs batch_size >= 1");
    if (n_items == 0) throw std::invalid_argument("training set is empty");

    std::ofstream log_file;
    if (!cfg.log_path.empty()) {
      log_file.open(cfg.log_path);
      if (!log_file) {
        throw std::runtime_error("cannot open training log " + cfg.log_path);
      }
      log_file << "epoch,train_loss,val_loss,lr,wall_time_s\n";
    }

    TrainResult result;
    result.best_val_loss = std::numeric_limits<double>::infinity();
    const auto start = std::chrono::steady_clock::now();
    std::vector<std::size_t> order(n_items);
    std::iota(order.begin(), order.end(), std::size_t{0});

    for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
      const double lr = cfg.lr.at(epoch);
      std::mt19937_64 rng(derive_seed(cfg.seed, static_cast<std::uint64_t>(epoch)));
      shuffle_indices(order, rng);

      double epoch_sum = 0.0;
      const std::size_t batch = static_cast<std::size_t>(cfg.batch_size);
      for (std::size_t b0 = 0; b0 < n_items; b0 += batch) {
        const std::size_t b1 = std::min(b0 + batch, n_items);
        LossGrads grads;
        const double sum =
            evaluate_batch(train_item, order, b0, b1, cfg.threads, grads);
        if (!std::isfinite(sum)) {
          throw std::runtime_error("training diverged at epoch " +
                                   std::to_string(epoch) +
                                   ": non-finite loss");
        }
        epoch_sum += sum;
        grads.scale(1.0 / static_cast<double>(b1 - b0));
        apply(grads, lr);
      }

      const double train_loss = epoch_sum / static_cast<double>(n_items);
      const double val_loss = validation();
      if (!std::isfinite(val_loss)) {
        throw std::runtime_error("training diverged at epoch " +
                                 std::to_string(epoch) +
                                 ": non-finite validation loss");
      }
      const double wall =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
              .count();

      result.log.push_back({epoch, train_loss, val_loss, lr, wall});
      result.final_train_loss = train_loss;
      if (log_file) {
        char line[256];
        std::snprintf(line, sizeof line, "%d,%.17g,%.17g,%g,%.3f\n", epoch,
                      train_loss, val_loss, lr, wall);
        log_file << line;
      }

      if (val_loss < result.best_val_loss) {
        result.best_val_loss = val_loss;
        result.best_epoch = epoch;
        snapshot_best();
      }
    }

    restore_best();
    return result;
  }
};

std::vector<Vector> collect_snapshots(const TrajectoryDataset& data,
                                      const std::vector<int>& sample_idx) {
  std::vector<Vector> out;
  out.reserve(sample_idx.size() * static_cast<std::size_t>(data.n_time));
  for (int s : sample_idx) {
    for (int j = 0; j < data.n_time; ++j) {
      out.push_back(data.states[s].row(j).transpose());
    }
  }
  return out;
}

}  // namespace

TrainResult train_autoencoder(Autoencoder& ae, const TrajectoryDataset& data,
                              const OdeProblem& problem, const TrainConfig& cfg) {
  (void)problem;  // snapshots alone drive this phase
  data.validate();
  ae.validate();
  const std::vector<Vector> train = collect_snapshots(data, data.train_idx);
  const std::vector<Vector> val = collect_snapshots(data, data.val_idx);
  if (val.empty()) throw std::invalid_argument("train_autoencoder: empty validation split");
  const LossWeights& w = cfg.weights;

  const auto item = [&](const Vector& u, LossGrads* g) {
    double loss = loss_autoencoder_item(ae, u, g, w.recon);
    if (w.conservation > 0.0) {
      loss += loss_conservation_item(ae, u, w.conservation_mass_defect, g,
                                     w.conservation);
    }
    if (w.orthogonality > 0.0) {
      // Constant across the batch; including it per item keeps slot sums
      // equal to the batch-mean objective.
      loss += loss_orthogonality(ae, g, w.orthogonality);
    }
    return loss;
  };

  AdamState opt_enc, opt_dec;
  std::pair<Vector, Vector> best{ae.encoder.params(), ae.decoder.params()};

  TrainingDriver driver{
      cfg,
      train.size(),
      [&](std::size_t i, LossGrads* g) { return item(train[i], g); },
      [&] {
        double total = 0.0;
        for (const Vector& u : val) total += item(u, nullptr);
        return total / static_cast<double>(val.size());
      },
      [&](const LossGrads& g, double lr) {
        opt_enc.lr = opt_dec.lr = lr;
        if (g.encoder.size() > 0) opt_enc.step(ae.encoder.params(), g.encoder);
        if (g.decoder.size() > 0) opt_dec.step(ae.decoder.params(), g.decoder);
      },
      [&] { best = {ae.encoder.params(), ae.decoder.params()}; },
      [&] {
        ae.encoder.params() = best.first;
        ae.decoder.params() = best.second;
      }};
  return driver.run();
}

TrainResult train_semi(Mlp& fn, const Autoencoder& ae,
                       const TrajectoryDataset& data, const OdeProblem& problem,
                       const TrainConfig& cfg) {
  data.validate();
  ae.validate();
  if (!data.has_rhs) {
    throw std::invalid_argument(
        "train_semi needs stored right-hand side values (store_rhs)");
  }
  if (fn.input_dim() != ae.latent_dim() + problem.param_dim ||
      fn.output_dim() != ae.latent_dim()) {
    throw std::invalid_argument("train_semi: fn has wrong dimensions");
  }

  // The autoencoder is frozen, so every network input and regression target
  // is a constant of the run; precompute them once.
  const auto make_pairs = [&](const std::vector<int>& sample_idx) {
    std::vector<std::pair<Vector, Vector>> pairs;
    pairs.reserve(sample_idx.size() * static_cast<std::size_t>(data.n_time));
    for (int s : sample_idx) {
      const Vector mu_hat = scale_mu01(problem, data.mus[s]);
      for (int j = 0; j < data.n_time; ++j) {
        const Vector u = data.states[s].row(j).transpose();
        const Vector f = data.rhs_values[s].row(j).transpose();
        pairs.emplace_back(semi_input(ae, u, mu_hat), semi_target(ae, u, f));
      }
    }
    return pairs;
  };
  const auto train = make_pairs(data.train_idx);
  const auto val = make_pairs(data.val_idx);
  if (val.empty()) throw std::invalid_argument("train_semi: empty validation split");

  // Optional dissipativity hinge: consecutive-in-time input pairs enter the
  // epoch as extra items, so the objective remains a plain mean over items.
  // Validation stays on the regression loss alone (model selection measures
  // fit quality).
  std::vector<std::vector<std::pair<Vector, Vector>>> hinge_pairs;
  if (cfg.weights.dissipativity > 0.0) {
    std::size_t base = 0;
    for (std::size_t s = 0; s < data.train_idx.size(); ++s) {
      for (int j = 0; j + 1 < data.n_time; ++j) {
        const std::size_t a = base + static_cast<std::size_t>(j);
        hinge_pairs.push_back({{train[a].first, train[a + 1].first}});
      }
      base += static_cast<std::size_t>(data.n_time);
    }
  }

  AdamState opt;
  Vector best = fn.params();

  TrainingDriver driver{
      cfg,
      train.size() + hinge_pairs.size(),
      [&](std::size_t i, LossGrads* g) {
        if (i < train.size())
          return loss_semi_item(fn, train[i].first, train[i].second, g);
        return loss_dissipativity(fn, hinge_pairs[i - train.size()],
                                  cfg.weights.dissipativity_margin, g,
                                  cfg.weights.dissipativity);
      },
      [&] {
        double total = 0.0;
        for (const auto& [x, y] : val) total += loss_semi_item(fn, x, y, nullptr);
        return total / static_cast<double>(val.size());
      },
      [&](const LossGrads& g, double lr) {
        opt.lr = lr;
        if (g.fn.size() > 0) opt.step(fn.params(), g.fn);
      },
      [&] { best = fn.params(); },
      [&] { fn.params() = best; }};
  return driver.run();
}

TrainResult train_fully(Autoencoder& ae, Mlp& fn, const TrajectoryDataset& data,
                        const OdeProblem& problem, const SchemeSpec& scheme,
                        const TrainConfig& cfg) {
  data.validate();
  ae.validate();
  if (scheme.alpha.empty()) {
    throw std::invalid_argument("train_fully needs a multistep scheme");
  }
  if (fn.input_dim() != ae.latent_dim() + problem.param_dim ||
      fn.output_dim() != ae.latent_dim()) {
    throw std::invalid_argument("train_fully: fn has wrong dimensions");
  }
  const int P = scheme.P;
  if (data.n_time < P + 1) {
    throw std::invalid_argument("train_fully: trajectories shorter than one window");
  }
  const LossWeights& w = cfg.weights;

  // A window is (sample, newest snapshot index q) with q in [P, n_time-1];
  // windows reaching before t = 0 are dropped.
  struct Window {
    int sample = 0, q = 0;
  };
  const auto make_windows = [&](const std::vector<int>& sample_idx) {
    std::vector<Window> ws;
    ws.reserve(sample_idx.size() * static_cast<std::size_t>(data.n_time - P));
    for (int s : sample_idx) {
      for (int q = P; q < data.n_time; ++q) ws.push_back({s, q});
    }
    return ws;
  };
  const auto train = make_windows(data.train_idx);
  const auto val = make_windows(data.val_idx);
  if (val.empty()) throw std::invalid_argument("train_fully: empty validation split");

  std::vector<Vector> mu_hats(data.n_samples());
  for (int s = 0; s < data.n_samples(); ++s) {
    mu_hats[s] = scale_mu01(problem, data.mus[s]);
  }

  const auto item = [&](const Window& win, LossGrads* g) {
    std::vector<Vector> snaps(static_cast<std::size_t>(P) + 1);
    std::vector<const Vector*> window(static_cast<std::size_t>(P) + 1);
    for (int p = 0; p <= P; ++p) {
      snaps[p] = data.states[win.sample].row(win.q - p).transpose();
      window[p] = &snaps[p];
    }
    const double per_snap = 1.0 / static_cast<double>(P + 1);
    double loss = 0.0;
    for (const Vector& u : snaps) {
      loss += loss_autoencoder_item(ae, u, g, w.recon * per_snap);
      if (w.conservation > 0.0) {
        loss += loss_conservation_item(ae, u, w.conservation_mass_defect, g,
                                       w.conservation * per_snap);
      }
    }
    loss += loss_residual_item(fn, ae, window, mu_hats[win.sample], scheme,
                               data.dt, g, w.residual);
    if (w.orthogonality > 0.0) loss += loss_orthogonality(ae, g, w.orthogonality);
    return loss;
  };

  AdamState opt_enc, opt_dec, opt_fn;
  struct Best {
    Vector enc, dec, fn;
  } best{ae.encoder.params(), ae.decoder.params(), fn.params()};

  TrainingDriver driver{
      cfg,
      train.size(),
      [&](std::size_t i, LossGrads* g) { return item(train[i], g); },
      [&] {
        double total = 0.0;
        for (const Window& win : val) total += item(win, nullptr);
        return total / static_cast<double>(val.size());
      },
      [&](const LossGrads& g, double lr) {
        opt_enc.lr = opt_dec.lr = opt_fn.lr = lr;
        if (g.encoder.size() > 0) opt_enc.step(ae.encoder.params(), g.encoder);
        if (g.decoder.size() > 0) opt_dec.step(ae.decoder.params(), g.decoder);
        if (g.fn.size() > 0) opt_fn.step(fn.params(), g.fn);
      },
      [&] { best = {ae.encoder.params(), ae.decoder.params(), fn.params()}; },
      [&] {
        ae.encoder.params() = best.enc;
        ae.decoder.params() = best.dec;
        fn.params() = best.fn;
      }};
  return driver.run();
}

}  // namespace dre
