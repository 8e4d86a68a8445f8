#include "dre/reduced_model.hpp"

#include <filesystem>
#include <fstream>

#include "dre/checkpoint.hpp"
#include "json.hpp"

namespace dre {

namespace fs = std::filesystem;
using nlohmann::json;

Vector ReducedModel::scale_mu(const Vector& mu) const {
  return scale_mu01(problem, mu);
}

Rhs ReducedModel::reduced_rhs(const Vector& mu) const {
  if (mode == RhsMode::Exact) {
    auto FN = problem.rhs;
    Vector m = mu;
    Autoencoder enc = ae;
    return [enc, FN, m](double, const Vector& un) -> Vector {
      const Vector x = enc.decode(un);
      return enc.encode_jvp(x, FN(x, m));
    };
  }
  if (!fn.has_value())
    throw std::runtime_error("ReducedModel: learned mode without a trained rhs network");
  const Mlp& net = *fn;
  Vector mu_hat = scale_mu(mu);
  Vector shift = ae.latent_shift;
  // The network was trained in the unshifted frame (at the training Ks).
  return [net, mu_hat, shift](double, const Vector& un) -> Vector {
    Vector z = un;
    if (shift.size() > 0) z += shift;
    Vector in(z.size() + mu_hat.size());
    in << z, mu_hat;
    return net.forward(in);
  };
}

Vector ReducedModel::initial_latent(const Vector& mu, Autoencoder& ae_out) const {
  const Vector u0 = problem.initial(mu);
  ae_out = ae;
  if (shift_mode == ShiftMode::ZeroInitial) {
    ae_out = shift_to_zero_initial(ae, u0);
    return Vector::Zero(ae.latent_dim());
  }
  return ae_out.encode(u0);
}

Matrix ReducedModel::reconstruct(const Matrix& reduced, const Autoencoder& ae_used) const {
  Matrix out(reduced.rows(), ae_used.full_dim());
  for (Eigen::Index k = 0; k < reduced.rows(); ++k)
    out.row(k) = ae_used.decode(reduced.row(k).transpose());
  return out;
}

Matrix ReducedModel::solve_reconstructed(const Vector& mu, const FixedGrid& grid,
                                         const SchemeSpec& scheme) const {
  ReducedModel local = *this;
  Autoencoder ae_used;
  const Vector z0 = initial_latent(mu, ae_used);
  local.ae = ae_used;
  const Matrix reduced = integrate_fixed(local.reduced_rhs(mu), z0, grid, scheme);
  return reconstruct(reduced, ae_used);
}

ReducedModel with_scaling(const ReducedModel& model, double Ks) {
  if (model.mode != RhsMode::Exact)
    throw std::invalid_argument(
        "with_scaling: a learned rhs is tied to its training frame");
  ReducedModel out = model;
  out.ae = with_scaling(model.ae, Ks);
  return out;
}

void save_bundle(const ReducedModel& model, const std::string& dir) {
  fs::create_directories(dir);
  save_checkpoint(model.ae.encoder, (fs::path(dir) / "encoder.json").string());
  save_checkpoint(model.ae.decoder, (fs::path(dir) / "decoder.json").string());
  json j;
  j["format_version"] = 1;
  j["n"] = model.ae.latent_dim();
  j["N"] = model.ae.full_dim();
  j["ks"] = model.ae.Ks;
  j["shift_mode"] = model.shift_mode == ShiftMode::ZeroInitial ? "zero-initial" : "none";
  j["problem"] = model.problem.name;
  j["dt_train"] = model.dt_train;
  j["scheme"] = model.scheme_name;
  j["rhs_mode"] = model.mode == RhsMode::Exact ? "exact" : "learned";
  j["encoder"] = "encoder.json";
  j["decoder"] = "decoder.json";
  j["normalization"] = {
      {"mean", std::vector<double>(model.ae.norm.mean.data(),
                                   model.ae.norm.mean.data() + model.ae.norm.mean.size())},
      {"scale", std::vector<double>(model.ae.norm.scale.data(),
                                    model.ae.norm.scale.data() + model.ae.norm.scale.size())}};
  if (model.mode == RhsMode::Learned) {
    save_checkpoint(*model.fn, (fs::path(dir) / "fn.json").string());
    j["fn"] = "fn.json";
  }
  std::ofstream out(fs::path(dir) / "bundle.json");
  if (!out) throw std::runtime_error("save_bundle: cannot write to '" + dir + "'");
  out << j.dump(2) << "\n";
}

ReducedModel load_bundle(const std::string& dir) {
  fs::path manifest = fs::path(dir);
  if (fs::is_directory(manifest)) manifest /= "bundle.json";
  std::ifstream in(manifest);
  if (!in) throw std::runtime_error("load_bundle: cannot open '" + manifest.string() + "'");
  json j;
  in >> j;
  if (j.value("format_version", 0) != 1)
    throw std::runtime_error("load_bundle: unsupported format_version");
  ReducedModel m;
  const fs::path base = manifest.parent_path();
  m.ae.encoder = load_checkpoint((base / j.at("encoder").get<std::string>()).string());
  m.ae.decoder = load_checkpoint((base / j.at("decoder").get<std::string>()).string());
  auto mean = j.at("normalization").at("mean").get<std::vector<double>>();
  auto scale = j.at("normalization").at("scale").get<std::vector<double>>();
  m.ae.norm.mean = Eigen::Map<const Vector>(mean.data(), mean.size());
  m.ae.norm.scale = Eigen::Map<const Vector>(scale.data(), scale.size());
  m.ae.Ks = j.at("ks").get<double>();
  m.shift_mode = j.at("shift_mode").get<std::string>() == "zero-initial"
                     ? ShiftMode::ZeroInitial
                     : ShiftMode::None;
  m.mode = j.at("rhs_mode").get<std::string>() == "learned" ? RhsMode::Learned
                                                            : RhsMode::Exact;
  if (m.mode == RhsMode::Learned)
    m.fn = load_checkpoint((base / j.at("fn").get<std::string>()).string());
  m.problem = make_problem(j.at("problem").get<std::string>());
  m.dt_train = j.at("dt_train").get<double>();
  m.scheme_name = j.at("scheme").get<std::string>();
  m.ae.validate();
  if (m.ae.latent_dim() != j.at("n").get<int>() || m.ae.full_dim() != j.at("N").get<int>())
    throw std::runtime_error("load_bundle: manifest dimensions disagree with checkpoints");
  return m;
}

}  // namespace dre
