#pragma once

#include "dre/mlp.hpp"

namespace dre {

/// Per-component affine standardization x_hat = (x - mean) / scale.
struct Normalization {
  Vector mean, scale;

  static Normalization identity(int dim) {
    return {Vector::Zero(dim), Vector::Ones(dim)};
  }
  /// Column mean/std over the rows; constant columns get scale 1.
  static Normalization fit(const Matrix& rows);

  Vector apply(const Vector& x) const {
    return (x - mean).cwiseQuotient(scale);
  }
  Vector invert(const Vector& xhat) const {
    return xhat.cwiseProduct(scale) + mean;
  }
  int dim() const { return static_cast<int>(mean.size()); }
};

/// Encoder/decoder pair around a latent space of dimension n < N.
///
/// encode(u) = Ks * enc(normalize(u)) - latent_shift
/// decode(z) = denormalize(dec((z + latent_shift) / Ks))
///
/// The networks operate on standardized states; the scaling factor Ks and the
/// optional per-trajectory latent shift reparameterize the latent space
/// without changing reconstructions.
struct Autoencoder {
  Mlp encoder;   // N -> n on standardized input
  Mlp decoder;   // n -> N producing standardized output
  Normalization norm;
  double Ks = 1.0;
  Vector latent_shift;  // empty means no shift

  int full_dim() const { return encoder.input_dim(); }
  int latent_dim() const { return encoder.output_dim(); }

  void validate() const;

  Vector encode(const Vector& uN) const;
  Vector decode(const Vector& un) const;
  Vector reconstruct(const Vector& uN) const { return decode(encode(uN)); }

  /// Directional derivative of encode at uN in the raw-space direction v.
  /// Includes the normalization and Ks chain; the shift has zero derivative.
  Vector encode_jvp(const Vector& uN, const Vector& v) const;
  Matrix encode_jacobian(const Vector& uN) const;
  Matrix decode_jacobian(const Vector& un) const;
};

/// Returns a copy whose latent_shift makes encode(uN0) exactly zero.
Autoencoder shift_to_zero_initial(const Autoencoder& ae, const Vector& uN0);

/// Returns a copy with a different scaling factor (Ks > 0).
Autoencoder with_scaling(const Autoencoder& ae, double Ks);

/// F_n(u_n) = J_encode(x) F_N(x) evaluated at x = decode(u_n); the encoder
/// Jacobian is applied through a jvp and never materialized.
Vector exact_reduced_rhs(const Autoencoder& ae,
                         const std::function<Vector(const Vector&)>& FN,
                         const Vector& un);

}  // namespace dre
