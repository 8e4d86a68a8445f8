#pragma once

#include <string>

#include "dre/mlp.hpp"

namespace dre {

/// JSON checkpoint, format_version 1:
///   {"format_version": 1,
///    "layers": [{"kind": "affine", "in": 3, "out": 30, "activation": "prelu"}, ...],
///    "params": [...]}
/// Parameters appear in flat order (per layer: weights row-major, bias, slope).
/// save -> load -> save is byte-identical.
void save_checkpoint(const Mlp& net, const std::string& path);
Mlp load_checkpoint(const std::string& path);

std::string layer_kind_name(LayerKind k);
std::string activation_name(Activation a);
LayerKind layer_kind_from_name(const std::string& s);
Activation activation_from_name(const std::string& s);

}  // namespace dre
