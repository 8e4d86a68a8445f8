#include "dre/mlp.hpp"

#include <cmath>
#include <random>

namespace dre {

namespace {

Eigen::Index layer_params(const LayerSpec& l) {
  Eigen::Index n = static_cast<Eigen::Index>(l.in) * l.out;
  if (l.kind == LayerKind::Affine) n += l.out;
  if (l.act == Activation::PRelu) n += 1;
  return n;
}

void validate_layers(const std::vector<LayerSpec>& layers) {
  if (layers.empty()) throw std::invalid_argument("Mlp: layer table is empty");
  for (size_t l = 0; l < layers.size(); ++l) {
    if (layers[l].in <= 0 || layers[l].out <= 0)
      throw std::invalid_argument("Mlp: layer " + std::to_string(l) +
                                  " has non-positive width");
    if (l > 0 && layers[l].in != layers[l - 1].out)
      throw std::invalid_argument("Mlp: layer " + std::to_string(l) +
                                  " input width does not match previous output");
  }
}

inline double act_forward(Activation a, double z, double slope) {
  switch (a) {
    case Activation::Identity: return z;
    case Activation::PRelu: return z >= 0.0 ? z : slope * z;
    case Activation::Elu: return z >= 0.0 ? z : std::expm1(z);
  }
  return z;
}

// Derivative w.r.t. the pre-activation; at z = 0 both PReLU and ELU use 1.
inline double act_deriv(Activation a, double z, double slope) {
  switch (a) {
    case Activation::Identity: return 1.0;
    case Activation::PRelu: return z >= 0.0 ? 1.0 : slope;
    case Activation::Elu: return z >= 0.0 ? 1.0 : std::exp(z);
  }
  return 1.0;
}

}  // namespace

Eigen::Index count_params(const std::vector<LayerSpec>& layers) {
  validate_layers(layers);
  Eigen::Index n = 0;
  for (const auto& l : layers) n += layer_params(l);
  return n;
}

Mlp::Mlp(std::vector<LayerSpec> layers, std::uint64_t seed)
    : layers_(std::move(layers)) {
  validate_layers(layers_);
  build_offsets();
  params_.resize(count_params(layers_));
  std::mt19937_64 rng(seed);
  for (size_t l = 0; l < layers_.size(); ++l) {
    const auto& spec = layers_[l];
    const double bound = std::sqrt(6.0 / spec.in);
    std::uniform_real_distribution<double> uni(-bound, bound);
    Eigen::Index off = offsets_[l];
    for (Eigen::Index k = 0; k < static_cast<Eigen::Index>(spec.in) * spec.out; ++k)
      params_[off + k] = uni(rng);
    off += static_cast<Eigen::Index>(spec.in) * spec.out;
    if (spec.kind == LayerKind::Affine) {
      params_.segment(off, spec.out).setZero();
      off += spec.out;
    }
    if (spec.act == Activation::PRelu) params_[off] = 0.25;
  }
}

Mlp::Mlp(std::vector<LayerSpec> layers, Vector params)
    : layers_(std::move(layers)), params_(std::move(params)) {
  validate_layers(layers_);
  build_offsets();
  if (params_.size() != count_params(layers_))
    throw std::invalid_argument(
        "Mlp: parameter vector has " + std::to_string(params_.size()) +
        " entries, layer table implies " + std::to_string(count_params(layers_)));
}

void Mlp::build_offsets() {
  offsets_.resize(layers_.size());
  Eigen::Index off = 0;
  for (size_t l = 0; l < layers_.size(); ++l) {
    offsets_[l] = off;
    off += layer_params(layers_[l]);
  }
}

Eigen::Index Mlp::bias_offset(int l) const {
  const auto& spec = layers_.at(l);
  if (spec.kind != LayerKind::Affine)
    throw std::invalid_argument("Mlp: layer " + std::to_string(l) + " has no bias");
  return offsets_[l] + static_cast<Eigen::Index>(spec.in) * spec.out;
}

Eigen::Index Mlp::slope_offset(int l) const {
  const auto& spec = layers_.at(l);
  if (spec.act != Activation::PRelu)
    throw std::invalid_argument("Mlp: layer " + std::to_string(l) + " has no PReLU slope");
  Eigen::Index off = offsets_[l] + static_cast<Eigen::Index>(spec.in) * spec.out;
  if (spec.kind == LayerKind::Affine) off += spec.out;
  return off;
}

void Mlp::check_input(const Vector& x) const {
  if (x.size() != input_dim())
    throw std::invalid_argument("Mlp: input has size " + std::to_string(x.size()) +
                                ", network expects " + std::to_string(input_dim()));
}

Vector Mlp::forward(const Vector& x) const {
  check_input(x);
  Vector y = x;
  for (size_t l = 0; l < layers_.size(); ++l) {
    const auto& spec = layers_[l];
    Eigen::Map<const RowMajorMatrix> W(params_.data() + offsets_[l], spec.out, spec.in);
    Vector z = W * y;
    if (spec.kind == LayerKind::Affine)
      z += params_.segment(bias_offset(static_cast<int>(l)), spec.out);
    const double slope =
        spec.act == Activation::PRelu ? params_[slope_offset(static_cast<int>(l))] : 0.0;
    for (Eigen::Index i = 0; i < z.size(); ++i) z[i] = act_forward(spec.act, z[i], slope);
    if (!z.allFinite())
      throw NumericError(static_cast<int>(l),
                         "Mlp: non-finite output at layer " + std::to_string(l));
    y = std::move(z);
  }
  return y;
}

Mlp::Cache Mlp::forward_cached(const Vector& x) const {
  check_input(x);
  Cache c;
  c.inputs.reserve(layers_.size());
  c.preacts.reserve(layers_.size());
  Vector y = x;
  for (size_t l = 0; l < layers_.size(); ++l) {
    const auto& spec = layers_[l];
    Eigen::Map<const RowMajorMatrix> W(params_.data() + offsets_[l], spec.out, spec.in);
    c.inputs.push_back(y);
    Vector z = W * y;
    if (spec.kind == LayerKind::Affine)
      z += params_.segment(bias_offset(static_cast<int>(l)), spec.out);
    if (!z.allFinite())
      throw NumericError(static_cast<int>(l),
                         "Mlp: non-finite pre-activation at layer " + std::to_string(l));
    const double slope =
        spec.act == Activation::PRelu ? params_[slope_offset(static_cast<int>(l))] : 0.0;
    y.resize(z.size());
    for (Eigen::Index i = 0; i < z.size(); ++i) y[i] = act_forward(spec.act, z[i], slope);
    c.preacts.push_back(std::move(z));
  }
  c.output = std::move(y);
  return c;
}

Vector Mlp::backward(const Cache& cache, const Vector& dLdy, Vector& grad) const {
  if (grad.size() != param_count())
    throw std::invalid_argument("Mlp::backward: grad accumulator has wrong size");
  if (dLdy.size() != output_dim())
    throw std::invalid_argument("Mlp::backward: dLdy has wrong size");
  Vector dy = dLdy;
  for (int l = static_cast<int>(layers_.size()) - 1; l >= 0; --l) {
    const auto& spec = layers_[l];
    const Vector& z = cache.preacts[l];
    const double slope =
        spec.act == Activation::PRelu ? params_[slope_offset(l)] : 0.0;
    Vector dz(z.size());
    for (Eigen::Index i = 0; i < z.size(); ++i)
      dz[i] = dy[i] * act_deriv(spec.act, z[i], slope);
    if (spec.act == Activation::PRelu) {
      double ds = 0.0;
      for (Eigen::Index i = 0; i < z.size(); ++i)
        if (z[i] < 0.0) ds += dy[i] * z[i];
      grad[slope_offset(l)] += ds;
    }
    Eigen::Map<RowMajorMatrix> dW(grad.data() + offsets_[l], spec.out, spec.in);
    dW.noalias() += dz * cache.inputs[l].transpose();
    if (spec.kind == LayerKind::Affine)
      grad.segment(bias_offset(l), spec.out) += dz;
    Eigen::Map<const RowMajorMatrix> W(params_.data() + offsets_[l], spec.out, spec.in);
    dy = W.transpose() * dz;
  }
  return dy;
}

Vector Mlp::grad_params(const Vector& x,
                        const std::function<Vector(const Vector&)>& dloss) const {
  Cache c = forward_cached(x);
  Vector grad = Vector::Zero(param_count());
  backward(c, dloss(c.output), grad);
  return grad;
}

Vector Mlp::input_jvp(const Vector& x, const Vector& v) const {
  check_input(x);
  if (v.size() != input_dim())
    throw std::invalid_argument("Mlp::input_jvp: direction has wrong size");
  Vector y = x;
  Vector t = v;
  for (size_t l = 0; l < layers_.size(); ++l) {
    const auto& spec = layers_[l];
    Eigen::Map<const RowMajorMatrix> W(params_.data() + offsets_[l], spec.out, spec.in);
    Vector z = W * y;
    if (spec.kind == LayerKind::Affine)
      z += params_.segment(bias_offset(static_cast<int>(l)), spec.out);
    Vector tz = W * t;
    if (!z.allFinite() || !tz.allFinite())
      throw NumericError(static_cast<int>(l),
                         "Mlp: non-finite tangent at layer " + std::to_string(l));
    const double slope =
        spec.act == Activation::PRelu ? params_[slope_offset(static_cast<int>(l))] : 0.0;
    y.resize(z.size());
    t.resize(z.size());
    for (Eigen::Index i = 0; i < z.size(); ++i) {
      y[i] = act_forward(spec.act, z[i], slope);
      t[i] = tz[i] * act_deriv(spec.act, z[i], slope);
    }
  }
  return t;
}

Matrix Mlp::input_jacobian(const Vector& x) const {
  Matrix J(output_dim(), input_dim());
  Vector e = Vector::Zero(input_dim());
  for (int j = 0; j < input_dim(); ++j) {
    e[j] = 1.0;
    J.col(j) = input_jvp(x, e);
    e[j] = 0.0;
  }
  return J;
}

}  // namespace dre
