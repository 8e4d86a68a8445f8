#include "dre/losses.hpp"

#include <cmath>
#include <stdexcept>

namespace dre {
namespace {

void ensure_sized(Vector& g, Eigen::Index n) {
  if (g.size() == 0) {
    g = Vector::Zero(n);
  } else if (g.size() != n) {
    throw std::invalid_argument("LossGrads field has wrong size");
  }
}

void add_field(Vector& a, const Vector& b) {
  if (b.size() == 0) return;
  if (a.size() == 0) {
    a = b;
  } else if (a.size() == b.size()) {
    a += b;
  } else {
    throw std::invalid_argument("LossGrads sizes do not match");
  }
}

}  // namespace

LossGrads& LossGrads::operator+=(const LossGrads& o) {
  add_field(encoder, o.encoder);
  add_field(decoder, o.decoder);
  add_field(fn, o.fn);
  return *this;
}

void LossGrads::scale(double s) {
  if (encoder.size() > 0) encoder *= s;
  if (decoder.size() > 0) decoder *= s;
  if (fn.size() > 0) fn *= s;
}

double loss_autoencoder_item(const Autoencoder& ae, const Vector& u,
                             LossGrads* grads, double weight) {
  const Vector vhat = ae.norm.apply(u);
  const Mlp::Cache ce = ae.encoder.forward_cached(vhat);
  const Mlp::Cache cd = ae.decoder.forward_cached(ce.output);
  const Vector res = cd.output - vhat;
  if (grads != nullptr) {
    ensure_sized(grads->encoder, ae.encoder.param_count());
    ensure_sized(grads->decoder, ae.decoder.param_count());
    const Vector dLdy = (2.0 * weight) * res;
    const Vector dLdz = ae.decoder.backward(cd, dLdy, grads->decoder);
    ae.encoder.backward(ce, dLdz, grads->encoder);
  }
  return weight * res.squaredNorm();
}

double loss_autoencoder(const Autoencoder& ae,
                        const std::vector<const Vector*>& batch,
                        LossGrads* grads) {
  if (batch.empty()) throw std::invalid_argument("loss_autoencoder: empty batch");
  const double w = 1.0 / static_cast<double>(batch.size());
  double total = 0.0;
  for (const Vector* u : batch) total += loss_autoencoder_item(ae, *u, grads, w);
  return total;
}

Vector semi_input(const Autoencoder& ae, const Vector& u, const Vector& mu_hat) {
  const Vector z = ae.encode(u);
  Vector x(z.size() + mu_hat.size());
  x.head(z.size()) = z;
  x.tail(mu_hat.size()) = mu_hat;
  return x;
}

Vector semi_target(const Autoencoder& ae, const Vector& u, const Vector& rhs) {
  return ae.encode_jvp(u, rhs);
}

double loss_semi_item(const Mlp& fn, const Vector& input, const Vector& target,
                      LossGrads* grads, double weight) {
  const Mlp::Cache c = fn.forward_cached(input);
  const Vector res = c.output - target;
  if (grads != nullptr) {
    ensure_sized(grads->fn, fn.param_count());
    const Vector dLdy = (2.0 * weight) * res;
    fn.backward(c, dLdy, grads->fn);
  }
  return weight * res.squaredNorm();
}

double loss_semi(const Mlp& fn, const Autoencoder& ae,
                 const std::vector<const Vector*>& us,
                 const std::vector<const Vector*>& mu_hats,
                 const std::vector<const Vector*>& rhss, LossGrads* grads) {
  if (us.empty()) throw std::invalid_argument("loss_semi: empty batch");
  if (us.size() != mu_hats.size() || us.size() != rhss.size()) {
    throw std::invalid_argument("loss_semi: batch vectors differ in length");
  }
  const double w = 1.0 / static_cast<double>(us.size());
  double total = 0.0;
  for (std::size_t i = 0; i < us.size(); ++i) {
    const Vector x = semi_input(ae, *us[i], *mu_hats[i]);
    const Vector y = semi_target(ae, *us[i], *rhss[i]);
    total += loss_semi_item(fn, x, y, grads, w);
  }
  return total;
}

double loss_residual_item(const Mlp& fn, const Autoencoder& ae,
                          const std::vector<const Vector*>& window,
                          const Vector& mu_hat, const SchemeSpec& scheme,
                          double dt, LossGrads* grads, double weight) {
  if (scheme.alpha.empty() || scheme.beta.empty()) {
    throw std::invalid_argument(
        "loss_residual_item: scheme " + scheme.name +
        " has no multistep coefficients");
  }
  const std::size_t width = static_cast<std::size_t>(scheme.P) + 1;
  if (scheme.alpha.size() != width || scheme.beta.size() != width) {
    throw std::invalid_argument(
        "loss_residual_item: coefficient tables do not match P");
  }
  if (window.size() != width) {
    throw std::invalid_argument("loss_residual_item: window size must be P+1");
  }
  if (!(dt > 0.0)) throw std::invalid_argument("loss_residual_item: dt must be positive");

  const Eigen::Index n = ae.latent_dim();
  Vector r = Vector::Zero(n);
  // One forward cache per window slot that feeds the network (beta_p != 0).
  std::vector<Mlp::Cache> caches(width);
  std::vector<bool> used(width, false);
  for (std::size_t p = 0; p < width; ++p) {
    const Vector z = ae.encode(*window[p]);
    r += scheme.alpha[p] * z;
    if (scheme.beta[p] != 0.0) {
      Vector x(z.size() + mu_hat.size());
      x.head(z.size()) = z;
      x.tail(mu_hat.size()) = mu_hat;
      caches[p] = fn.forward_cached(x);
      used[p] = true;
      r -= dt * scheme.beta[p] * caches[p].output;
    }
  }
  if (grads != nullptr) {
    ensure_sized(grads->fn, fn.param_count());
    for (std::size_t p = 0; p < width; ++p) {
      if (!used[p]) continue;
      const Vector dLdy = (-2.0 * weight * dt * scheme.beta[p]) * r;
      fn.backward(caches[p], dLdy, grads->fn);
    }
  }
  return weight * r.squaredNorm();
}

double loss_conservation_item(const Autoencoder& ae, const Vector& u,
                              bool mass_defect_variant, LossGrads* grads,
                              double weight) {
  const Vector vhat = ae.norm.apply(u);
  const Mlp::Cache ce = ae.encoder.forward_cached(vhat);
  const Mlp::Cache cd = ae.decoder.forward_cached(ce.output);
  const Vector rec = ae.norm.invert(cd.output);
  const Vector d = u - rec;

  double value = 0.0;
  Vector dLdrec;  // gradient with respect to the raw reconstruction
  if (mass_defect_variant) {
    const double defect = d.sum();
    value = weight * defect * defect;
    dLdrec = Vector::Constant(d.size(), -2.0 * weight * defect);
  } else {
    value = weight * d.squaredNorm();
    dLdrec = (-2.0 * weight) * d;
  }
  if (grads != nullptr) {
    ensure_sized(grads->encoder, ae.encoder.param_count());
    ensure_sized(grads->decoder, ae.decoder.param_count());
    const Vector dLdy = dLdrec.cwiseProduct(ae.norm.scale);
    const Vector dLdz = ae.decoder.backward(cd, dLdy, grads->decoder);
    ae.encoder.backward(ce, dLdz, grads->encoder);
  }
  return value;
}

namespace {

// Checks that a network is one Linear layer with identity activation and
// returns its weight matrix mapped from the flat parameter vector.
Eigen::Map<const RowMajorMatrix> single_linear_weights(const Mlp& net,
                                                       const char* role) {
  const auto& layers = net.layers();
  if (layers.size() != 1 || layers[0].kind != LayerKind::Linear ||
      layers[0].act != Activation::Identity) {
    throw std::invalid_argument(
        std::string("loss_orthogonality: ") + role +
        " must be a single Linear layer with identity activation");
  }
  return Eigen::Map<const RowMajorMatrix>(net.params().data(), layers[0].out,
                                          layers[0].in);
}

}  // namespace

double loss_orthogonality(const Autoencoder& ae, LossGrads* grads,
                          double weight) {
  const auto We = single_linear_weights(ae.encoder, "encoder");  // n x N
  const auto Wd = single_linear_weights(ae.decoder, "decoder");  // N x n

  const Matrix E = We.transpose();       // N x n
  const Matrix D = Wd.transpose();       // n x N
  const Matrix G = E.transpose() * E;    // n x n
  const Matrix M = G * D - E.transpose();  // n x N
  const double value = weight * M.squaredNorm();

  if (grads != nullptr) {
    ensure_sized(grads->encoder, ae.encoder.param_count());
    ensure_sized(grads->decoder, ae.decoder.param_count());
    const Matrix dD = 2.0 * G * M;                                    // n x N
    const Matrix dE = 2.0 * (E * D * M.transpose() + E * M * D.transpose() -
                             M.transpose());                          // N x n
    Eigen::Map<RowMajorMatrix> gWe(grads->encoder.data(), We.rows(), We.cols());
    Eigen::Map<RowMajorMatrix> gWd(grads->decoder.data(), Wd.rows(), Wd.cols());
    gWe += weight * dE.transpose();
    gWd += weight * dD.transpose();
  }
  return value;
}

double loss_dissipativity(const Mlp& fn,
                          const std::vector<std::pair<Vector, Vector>>& pairs,
                          double margin, LossGrads* grads, double weight) {
  if (pairs.empty()) throw std::invalid_argument("loss_dissipativity: no pairs");
  const Eigen::Index n = fn.output_dim();
  const double w = weight / static_cast<double>(pairs.size());
  double total = 0.0;
  for (const auto& [a, b] : pairs) {
    const Vector s = a.head(n) - b.head(n);
    const double s2 = s.squaredNorm();
    if (s2 == 0.0) continue;  // quotient undefined for coincident states
    const Mlp::Cache ca = fn.forward_cached(a);
    const Mlp::Cache cb = fn.forward_cached(b);
    const double nu = (ca.output - cb.output).dot(s) / s2;
    const double h = nu - margin;
    if (h <= 0.0) continue;
    total += w * h;
    if (grads != nullptr) {
      ensure_sized(grads->fn, fn.param_count());
      const Vector dLdy = (w / s2) * s;
      fn.backward(ca, dLdy, grads->fn);
      fn.backward(cb, -dLdy, grads->fn);
    }
  }
  return total;
}

}  // namespace dre
