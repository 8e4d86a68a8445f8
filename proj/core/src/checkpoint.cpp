#include "dre/checkpoint.hpp"

#include <fstream>

#include "json.hpp"

namespace dre {

using nlohmann::json;

std::string layer_kind_name(LayerKind k) {
  return k == LayerKind::Linear ? "linear" : "affine";
}

std::string activation_name(Activation a) {
  switch (a) {
    case Activation::Identity: return "identity";
    case Activation::PRelu: return "prelu";
    case Activation::Elu: return "elu";
  }
  return "identity";
}

LayerKind layer_kind_from_name(const std::string& s) {
  if (s == "linear") return LayerKind::Linear;
  if (s == "affine") return LayerKind::Affine;
  throw std::runtime_error("checkpoint: unknown layer kind '" + s + "'");
}

Activation activation_from_name(const std::string& s) {
  if (s == "identity") return Activation::Identity;
  if (s == "prelu") return Activation::PRelu;
  if (s == "elu") return Activation::Elu;
  throw std::runtime_error("checkpoint: unknown activation '" + s + "'");
}

void save_checkpoint(const Mlp& net, const std::string& path) {
  json j;
  j["format_version"] = 1;
  j["layers"] = json::array();
  for (const auto& l : net.layers()) {
    j["layers"].push_back({{"kind", layer_kind_name(l.kind)},
                           {"in", l.in},
                           {"out", l.out},
                           {"activation", activation_name(l.act)}});
  }
  j["params"] = std::vector<double>(net.params().data(),
                                    net.params().data() + net.param_count());
  std::ofstream out(path);
  if (!out) throw std::runtime_error("checkpoint: cannot open '" + path + "' for writing");
  out << j.dump(2) << "\n";
}

Mlp load_checkpoint(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("checkpoint: cannot open '" + path + "'");
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw std::runtime_error("checkpoint: '" + path + "' is not valid JSON: " + e.what());
  }
  if (!j.contains("format_version") || j["format_version"].get<int>() != 1)
    throw std::runtime_error("checkpoint: '" + path + "' has unsupported format_version");
  if (!j.contains("layers") || !j["layers"].is_array() || j["layers"].empty())
    throw std::runtime_error("checkpoint: '" + path + "' has no layers");
  std::vector<LayerSpec> layers;
  for (size_t i = 0; i < j["layers"].size(); ++i) {
    const auto& jl = j["layers"][i];
    try {
      LayerSpec spec;
      spec.kind = layer_kind_from_name(jl.at("kind").get<std::string>());
      spec.in = jl.at("in").get<int>();
      spec.out = jl.at("out").get<int>();
      spec.act = activation_from_name(jl.at("activation").get<std::string>());
      layers.push_back(spec);
    } catch (const json::exception& e) {
      throw std::runtime_error("checkpoint: layer " + std::to_string(i) +
                               " is malformed: " + e.what());
    }
  }
  auto raw = j.at("params").get<std::vector<double>>();
  const Eigen::Index expected = count_params(layers);
  if (static_cast<Eigen::Index>(raw.size()) != expected)
    throw std::runtime_error("checkpoint: '" + path + "' has " +
                             std::to_string(raw.size()) + " params, layer table implies " +
                             std::to_string(expected));
  Vector params = Eigen::Map<const Vector>(raw.data(), raw.size());
  if (!params.allFinite())
    throw std::runtime_error("checkpoint: '" + path + "' contains non-finite params");
  return Mlp(std::move(layers), std::move(params));
}

}  // namespace dre
