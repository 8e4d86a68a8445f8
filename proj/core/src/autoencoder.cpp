#include "dre/autoencoder.hpp"

#include <cmath>

namespace dre {

Normalization Normalization::fit(const Matrix& rows) {
  if (rows.rows() < 2) throw std::invalid_argument("Normalization::fit: need >= 2 rows");
  Normalization n;
  n.mean = rows.colwise().mean();
  Matrix centered = rows.rowwise() - n.mean.transpose();
  n.scale = (centered.array().square().colwise().sum() /
             static_cast<double>(rows.rows() - 1))
                .sqrt()
                .matrix();
  for (Eigen::Index i = 0; i < n.scale.size(); ++i)
    if (!(n.scale[i] > 1e-12)) n.scale[i] = 1.0;
  return n;
}

void Autoencoder::validate() const {
  if (encoder.layers().empty() || decoder.layers().empty())
    throw std::invalid_argument("Autoencoder: encoder/decoder not set");
  if (encoder.output_dim() != decoder.input_dim())
    throw std::invalid_argument("Autoencoder: latent dimensions disagree");
  if (encoder.input_dim() != decoder.output_dim())
    throw std::invalid_argument("Autoencoder: full dimensions disagree");
  if (encoder.output_dim() >= encoder.input_dim())
    throw std::invalid_argument("Autoencoder: latent dimension must be below full dimension");
  if (norm.dim() != encoder.input_dim())
    throw std::invalid_argument("Autoencoder: normalization has wrong dimension");
  if (!(Ks > 0.0)) throw std::invalid_argument("Autoencoder: Ks must be positive");
  if (latent_shift.size() != 0 && latent_shift.size() != encoder.output_dim())
    throw std::invalid_argument("Autoencoder: latent shift has wrong dimension");
}

Vector Autoencoder::encode(const Vector& uN) const {
  Vector z = Ks * encoder.forward(norm.apply(uN));
  if (latent_shift.size() > 0) z -= latent_shift;
  return z;
}

Vector Autoencoder::decode(const Vector& un) const {
  Vector z = un;
  if (latent_shift.size() > 0) z += latent_shift;
  return norm.invert(decoder.forward(z / Ks));
}

Vector Autoencoder::encode_jvp(const Vector& uN, const Vector& v) const {
  return Ks * encoder.input_jvp(norm.apply(uN), v.cwiseQuotient(norm.scale));
}

Matrix Autoencoder::encode_jacobian(const Vector& uN) const {
  Matrix J = Ks * encoder.input_jacobian(norm.apply(uN));
  for (Eigen::Index j = 0; j < J.cols(); ++j) J.col(j) /= norm.scale[j];
  return J;
}

Matrix Autoencoder::decode_jacobian(const Vector& un) const {
  Vector z = un;
  if (latent_shift.size() > 0) z += latent_shift;
  Matrix J = decoder.input_jacobian(z / Ks) / Ks;
  for (Eigen::Index i = 0; i < J.rows(); ++i) J.row(i) *= norm.scale[i];
  return J;
}

Autoencoder shift_to_zero_initial(const Autoencoder& ae, const Vector& uN0) {
  Autoencoder out = ae;
  out.latent_shift = Vector();
  out.latent_shift = out.encode(uN0);
  return out;
}

Autoencoder with_scaling(const Autoencoder& ae, double Ks) {
  if (!(Ks > 0.0)) throw std::invalid_argument("with_scaling: Ks must be positive");
  if (ae.latent_shift.size() > 0)
    throw std::invalid_argument("with_scaling: rescale before shifting, not after");
  Autoencoder out = ae;
  out.Ks = Ks;
  return out;
}

Vector exact_reduced_rhs(const Autoencoder& ae,
                         const std::function<Vector(const Vector&)>& FN,
                         const Vector& un) {
  const Vector x = ae.decode(un);
  return ae.encode_jvp(x, FN(x));
}

}  // namespace dre
