#include "dre/net_presets.hpp"

#include <stdexcept>

namespace dre {

namespace {

LayerSpec lin(int in, int out, Activation act = Activation::Identity) {
  return LayerSpec{LayerKind::Linear, in, out, act};
}

LayerSpec aff(int in, int out, Activation act) {
  return LayerSpec{LayerKind::Affine, in, out, act};
}

void repeat(std::vector<LayerSpec>& v, int count, const LayerSpec& spec) {
  for (int i = 0; i < count; ++i) v.push_back(spec);
}

// Encoder/decoder pair shared by the three-dimensional linear problems and
// SIR: a linear encoder onto n=2 and a PReLU decoder that expands through a
// single wide block before contracting back to N=3.
NetPreset dense3_preset(bool paper_scale, bool linear_decoder) {
  NetPreset p;
  p.latent = 2;
  p.encoder = {lin(3, 2)};
  if (linear_decoder) {
    p.decoder = {lin(2, 3)};
    return p;  // exact reduced RHS only
  }
  const int w = paper_scale ? 30 : 24;
  const int hidden = paper_scale ? 8 : 2;
  p.decoder = {lin(2, 3, Activation::PRelu), aff(3, w, Activation::PRelu)};
  repeat(p.decoder, hidden, aff(w, w, Activation::PRelu));
  p.decoder.push_back(aff(w, 3, Activation::PRelu));
  p.decoder.push_back(aff(3, 3, Activation::Identity));
  return p;
}

// Learned RHS for latent size 2 with one scalar parameter: input [u_n; mu].
std::vector<LayerSpec> fn_latent2(bool paper_scale) {
  std::vector<LayerSpec> fn;
  if (paper_scale) {
    fn = {lin(3, 9, Activation::PRelu)};
    repeat(fn, 8, aff(9, 9, Activation::PRelu));
    fn.push_back(aff(9, 3, Activation::PRelu));
    fn.push_back(aff(3, 2, Activation::Identity));
  } else {
    fn = {aff(3, 12, Activation::PRelu), aff(12, 12, Activation::PRelu),
          aff(12, 3, Activation::PRelu), aff(3, 2, Activation::Identity)};
  }
  return fn;
}

NetPreset chemistry_preset(bool paper_scale) {
  NetPreset p;
  p.latent = 3;
  const int N = 19;
  const int enc_hidden = paper_scale ? 5 : 1;
  p.encoder = {aff(N, 21, Activation::Elu)};
  repeat(p.encoder, enc_hidden, aff(21, 21, Activation::Elu));
  p.encoder.push_back(lin(21, 3, Activation::Elu));

  const int dec_hidden = paper_scale ? 7 : 1;
  p.decoder = {lin(3, N, Activation::PRelu), aff(N, 21, Activation::PRelu)};
  repeat(p.decoder, dec_hidden, aff(21, 21, Activation::PRelu));
  p.decoder.push_back(aff(21, N, Activation::PRelu));
  p.decoder.push_back(aff(N, N, Activation::Identity));

  // Input [u_n (3); mu_scaled (2)].
  const int w = paper_scale ? 20 : 16;
  const int fn_hidden = paper_scale ? 5 : 1;
  p.fn = {aff(5, w, Activation::PRelu)};
  repeat(p.fn, fn_hidden, aff(w, w, Activation::PRelu));
  p.fn.push_back(aff(w, 3, Activation::PRelu));
  p.fn.push_back(aff(3, 3, Activation::Identity));
  return p;
}

// Larger linear problems keep the linear encoder; the decoder widens with N.
NetPreset wide_linear_preset(int N, bool paper_scale) {
  NetPreset p;
  p.latent = 2;
  p.encoder = {lin(N, 2)};
  p.decoder = {lin(2, N, Activation::PRelu)};
  if (paper_scale) {
    p.decoder.push_back(aff(N, 2 * N, Activation::PRelu));
    p.decoder.push_back(aff(2 * N, 2 * N, Activation::PRelu));
    p.decoder.push_back(aff(2 * N, N, Activation::PRelu));
  } else {
    p.decoder.push_back(aff(N, N, Activation::PRelu));
  }
  p.decoder.push_back(aff(N, N, Activation::Identity));
  p.fn = fn_latent2(paper_scale);
  return p;
}

// Static manifolds live in R^3 with intrinsic dimension 1.
NetPreset manifold_preset(bool linear) {
  NetPreset p;
  p.latent = 1;
  if (linear) {
    p.encoder = {lin(3, 1)};
    p.decoder = {lin(1, 3)};
    return p;
  }
  p.encoder = {aff(3, 16, Activation::Elu), aff(16, 16, Activation::Elu),
               lin(16, 1, Activation::Elu)};
  p.decoder = {lin(1, 16, Activation::PRelu), aff(16, 16, Activation::PRelu),
               aff(16, 3, Activation::Identity)};
  return p;
}

}  // namespace

NetPreset net_preset(const std::string& problem, bool paper_scale) {
  if (problem == "test1-linear") return dense3_preset(paper_scale, true);
  if (problem == "test1-nonlinear") {
    NetPreset p = dense3_preset(paper_scale, false);
    p.fn = fn_latent2(paper_scale);
    return p;
  }
  if (problem == "sir") {
    NetPreset p = dense3_preset(paper_scale, false);
    p.fn = fn_latent2(paper_scale);
    return p;
  }
  if (problem == "chemistry") return chemistry_preset(paper_scale);
  if (problem == "test1-nonlinear-N100") return wide_linear_preset(100, paper_scale);
  if (problem == "test1-nonlinear-N500") return wide_linear_preset(500, paper_scale);
  if (problem == "flat-line") return manifold_preset(true);
  if (problem == "graph" || problem == "coil" || problem == "noisy-coil")
    return manifold_preset(false);
  throw std::invalid_argument("net_preset: unknown preset '" + problem + "'");
}

}  // namespace dre
