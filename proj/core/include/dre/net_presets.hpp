#pragma once

#include <string>
#include <vector>

#include "dre/mlp.hpp"

namespace dre {

/// Layer tables for the autoencoder and, where applicable, the learned
/// reduced right-hand side of one experiment preset.
struct NetPreset {
  std::vector<LayerSpec> encoder;
  std::vector<LayerSpec> decoder;
  /// Network for the learned reduced RHS, taking [u_n; mu_scaled].
  /// Empty when the preset is meant for the exact reduced RHS only.
  std::vector<LayerSpec> fn;
  int latent = 0;
};

/// Architecture preset for a named problem ("test1-linear", "test1-nonlinear",
/// "test1-nonlinear-N100/N500", "sir", "chemistry") or static manifold
/// ("flat-line", "graph", "coil", "noisy-coil").
///
/// paper_scale=true reproduces the full-size layer tables; the default
/// desk-scale variant keeps the same shape (kinds, activations, where the
/// contraction/expansion happens) with fewer and narrower hidden layers.
/// "test1-linear" and "flat-line" are identical at both scales.
NetPreset net_preset(const std::string& problem, bool paper_scale = false);

}  // namespace dre
