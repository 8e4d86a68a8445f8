#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "json.hpp"

namespace dre {

inline constexpr const char* kDreVersion = "0.1.0";

/// Value of one configuration key. Integers are kept distinct from floats so
/// seeds survive the round trip exactly.
using TomlValue = std::variant<bool, long long, double, std::string,
                               std::vector<double>, std::vector<std::string>>;
using TomlTable = std::map<std::string, TomlValue>;

/// Parses the TOML subset used for experiment configs: `key = value` lines,
/// `#` comments, quoted strings with \\ \" \n \t escapes, booleans, numbers,
/// and homogeneous arrays of numbers or strings. `[section]` headers are
/// accepted as visual grouping only — keys are global, so the same key may
/// not appear under two sections.
TomlTable parse_toml(const std::string& text);
TomlTable load_toml_file(const std::string& path);

/// "201:1e-4,351:1e-5" -> {(201, 1e-4), (351, 1e-5)}; epochs are 1-based and
/// must be strictly increasing.
std::vector<std::pair<int, double>> parse_milestones(const std::string& text);

/// Fully resolved knobs of one experiment run. Negative numeric values (and
/// empty strings) mean "use the preset default"; resolution happens in the
/// experiments layer so that the values recorded in run.json are final.
struct RunConfig {
  std::string subcommand;

  // What to run on.
  std::string problem;
  std::string manifold;
  std::string dataset;  // dataset directory (input)
  std::string bundle;   // model bundle directory (input)
  std::string out;      // output directory

  // Modeling choices.
  std::string strategy = "exact-rhs";  // exact-rhs | semi | fully
  std::string scheme;                  // fe | ab2 | rk4 (empty = preset)
  std::string shift = "none";         // none | zero-initial
  double ks = 1.0;
  int latent = -1;

  // Dataset shape.
  int samples = -1;
  int ntime = -1;
  double T = -1.0;
  bool store_rhs = false;

  // Training.
  int epochs = -1;
  int batch = -1;
  double lr = -1.0;
  std::string lr_milestones;  // "epoch:lr,epoch:lr"; empty = preset
  double eta1 = 1.0;          // reconstruction weight
  double eta3 = 1.0;          // residual weight (fully data-driven)
  double conservation = -1.0;
  bool conservation_mass_defect = false;
  double orthogonality = 0.0;
  double dissipativity = 0.0;
  double dissipativity_margin = 0.0;

  // Evaluation / sweeps.
  double dt = 0.0;       // 0 = dataset training step
  double T_query = -1.0; // evaluation horizon (chemistry extrapolates to 6)
  int s_min = -4;
  int s_max = 6;
  std::string schemes = "fe,ab2,rk4";

  // Stability experiment.
  double delta0 = 0.0;    // initial latent offset, per component
  double big_delta0 = 0.0;  // initial state offset, per component
  double delta_lo = 0.0, delta_hi = 0.0;      // latent-rate box
  double big_delta_lo = 0.0, big_delta_hi = 0.0;  // state-rate box
  int n_mu = 2;           // test parameters to run bound curves for

  // Manifold study.
  int count = -1;  // cloud size

  // Run plumbing.
  std::uint64_t seed = 0;
  int threads = 1;
  bool paper_scale = false;
  bool force = false;

  /// Applies recognized keys; throws on unknown keys or type mismatches.
  void apply_table(const TomlTable& table);

  nlohmann::json to_json() const;
  static RunConfig from_json(const nlohmann::json& j);
};

/// Loads a config from a .toml file or from a run.json (the "config" object
/// is used when present, so a run can be repeated from its own record).
RunConfig load_run_config(const std::string& path);

/// Library/toolchain versions recorded into run.json (no timestamps, so
/// reruns stay byte-identical).
nlohmann::json versions_json();

/// Writes <dir>/run.json with the resolved config; deterministic bytes.
void write_run_json(const RunConfig& resolved, const std::string& dir);

}  // namespace dre
