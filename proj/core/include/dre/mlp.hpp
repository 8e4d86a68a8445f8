#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "dre/common.hpp"

namespace dre {

enum class LayerKind { Linear, Affine };
enum class Activation { Identity, PRelu, Elu };

/// One fully connected layer: y = act(W x [+ b]).
/// Linear layers have no bias, Affine layers do.
struct LayerSpec {
  LayerKind kind = LayerKind::Affine;
  int in = 0;
  int out = 0;
  Activation act = Activation::Identity;
};

/// Scalar parameters implied by a layer table: weights, biases and one
/// learnable PReLU slope per PReLU layer.
Eigen::Index count_params(const std::vector<LayerSpec>& layers);

/// Multilayer perceptron over doubles with a flat parameter vector.
///
/// Parameter layout, per layer in order: weight matrix (row-major, out x in),
/// bias (Affine only), PReLU slope (one scalar, PReLU layers only).
///
/// Activation conventions: PReLU(z) = z for z >= 0 and a*z otherwise, with the
/// derivative at z = 0 taken from the positive branch; ELU(z) = z for z >= 0
/// and exp(z)-1 otherwise (alpha fixed to 1).
class Mlp {
 public:
  Mlp() = default;

  /// Kaiming-style uniform init: W ~ U(-sqrt(6/in), sqrt(6/in)), biases zero,
  /// PReLU slopes 0.25. Same seed, same layers -> identical parameters.
  Mlp(std::vector<LayerSpec> layers, std::uint64_t seed);

  /// Wraps an existing flat parameter vector; throws on size mismatch.
  Mlp(std::vector<LayerSpec> layers, Vector params);

  const std::vector<LayerSpec>& layers() const { return layers_; }
  int input_dim() const { return layers_.empty() ? 0 : layers_.front().in; }
  int output_dim() const { return layers_.empty() ? 0 : layers_.back().out; }
  Eigen::Index param_count() const { return params_.size(); }
  const Vector& params() const { return params_; }
  Vector& params() { return params_; }

  Vector forward(const Vector& x) const;

  /// Activations recorded by a forward pass, for backward().
  struct Cache {
    std::vector<Vector> inputs;    // input of each layer
    std::vector<Vector> preacts;   // W x + b of each layer
    Vector output;
  };
  Cache forward_cached(const Vector& x) const;

  /// Reverse pass. Accumulates d(loss)/d(params) into `grad` (must be sized
  /// param_count(), may hold prior contributions) and returns d(loss)/d(input).
  Vector backward(const Cache& cache, const Vector& dLdy, Vector& grad) const;

  /// d(loss)/d(params) for a scalar loss of the network output.
  /// `dloss` maps the output to the gradient of the loss at that output.
  Vector grad_params(const Vector& x,
                     const std::function<Vector(const Vector&)>& dloss) const;

  /// Forward-mode directional derivative: d/da net(x + a v) at a = 0.
  /// The Jacobian is never materialized.
  Vector input_jvp(const Vector& x, const Vector& v) const;

  /// Dense input Jacobian (output_dim x input_dim), one jvp per basis vector.
  Matrix input_jacobian(const Vector& x) const;

  // Flat-vector offsets for layer l; exposed for checkpoints and tests.
  Eigen::Index weight_offset(int l) const { return offsets_[l]; }
  Eigen::Index bias_offset(int l) const;   // throws unless layer l is Affine
  Eigen::Index slope_offset(int l) const;  // throws unless layer l is PReLU

 private:
  void build_offsets();
  void check_input(const Vector& x) const;

  std::vector<LayerSpec> layers_;
  std::vector<Eigen::Index> offsets_;  // start of each layer's block
  Vector params_;
};

}  // namespace dre
