#include "dre/config.hpp"

#include <Eigen/Core>
#include <cctype>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <stdexcept>

namespace dre {

namespace {

using nlohmann::json;

[[noreturn]] void fail(int line, const std::string& what) {
  throw std::runtime_error("config: line " + std::to_string(line) + ": " + what);
}

std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

// Removes an unquoted trailing comment.
std::string strip_comment(const std::string& line) {
  bool in_string = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    char c = line[i];
    if (in_string && c == '\\') {
      ++i;
      continue;
    }
    if (c == '"') in_string = !in_string;
    if (c == '#' && !in_string) return line.substr(0, i);
  }
  return line;
}

std::string parse_string(const std::string& tok, int line) {
  if (tok.size() < 2 || tok.back() != '"') fail(line, "unterminated string");
  std::string out;
  for (std::size_t i = 1; i + 1 < tok.size(); ++i) {
    char c = tok[i];
    if (c != '\\') {
      out += c;
      continue;
    }
    if (i + 2 >= tok.size()) fail(line, "dangling escape in string");
    char e = tok[++i];
    switch (e) {
      case '"': out += '"'; break;
      case '\\': out += '\\'; break;
      case 'n': out += '\n'; break;
      case 't': out += '\t'; break;
      default: fail(line, std::string("unsupported escape \\") + e);
    }
  }
  return out;
}

bool looks_integer(const std::string& tok) {
  std::size_t i = (tok[0] == '+' || tok[0] == '-') ? 1 : 0;
  if (i == tok.size()) return false;
  for (; i < tok.size(); ++i)
    if (!std::isdigit(static_cast<unsigned char>(tok[i]))) return false;
  return true;
}

TomlValue parse_scalar(const std::string& tok, int line) {
  if (tok == "true") return true;
  if (tok == "false") return false;
  if (tok.front() == '"') return parse_string(tok, line);
  if (looks_integer(tok)) {
    try {
      return static_cast<long long>(std::stoll(tok));
    } catch (const std::out_of_range&) {
      fail(line, "integer out of range: " + tok);
    }
  }
  try {
    std::size_t used = 0;
    double v = std::stod(tok, &used);
    if (used != tok.size()) fail(line, "malformed number: " + tok);
    return v;
  } catch (const std::invalid_argument&) {
    fail(line, "unrecognized value: " + tok);
  } catch (const std::out_of_range&) {
    fail(line, "number out of range: " + tok);
  }
}

// Splits "a, b, c" at top level (no nested arrays in this subset).
std::vector<std::string> split_array_items(const std::string& body, int line) {
  std::vector<std::string> items;
  std::string cur;
  bool in_string = false;
  for (std::size_t i = 0; i < body.size(); ++i) {
    char c = body[i];
    if (in_string && c == '\\' && i + 1 < body.size()) {
      cur += c;
      cur += body[++i];
      continue;
    }
    if (c == '"') in_string = !in_string;
    if (c == ',' && !in_string) {
      items.push_back(trim(cur));
      cur.clear();
      continue;
    }
    if (c == '[' && !in_string) fail(line, "nested arrays are not supported");
    cur += c;
  }
  if (in_string) fail(line, "unterminated string in array");
  std::string last = trim(cur);
  if (!last.empty()) items.push_back(last);
  for (const std::string& it : items)
    if (it.empty()) fail(line, "empty array element");
  return items;
}

TomlValue parse_array(const std::string& tok, int line) {
  if (tok.back() != ']') fail(line, "unterminated array");
  std::vector<std::string> items =
      split_array_items(tok.substr(1, tok.size() - 2), line);
  bool strings = !items.empty() && items.front().front() == '"';
  if (strings) {
    std::vector<std::string> out;
    for (const std::string& it : items) {
      if (it.front() != '"') fail(line, "mixed array element types");
      out.push_back(parse_string(it, line));
    }
    return out;
  }
  std::vector<double> out;
  for (const std::string& it : items) {
    TomlValue v = parse_scalar(it, line);
    if (std::holds_alternative<long long>(v))
      out.push_back(static_cast<double>(std::get<long long>(v)));
    else if (std::holds_alternative<double>(v))
      out.push_back(std::get<double>(v));
    else
      fail(line, "arrays may hold numbers or strings only");
  }
  return out;
}

bool valid_key(const std::string& key) {
  if (key.empty()) return false;
  for (char c : key)
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_' && c != '-' &&
        c != '.')
      return false;
  return true;
}

}  // namespace

TomlTable parse_toml(const std::string& text) {
  TomlTable table;
  std::istringstream in(text);
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string line = trim(strip_comment(raw));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']' || line.size() < 3)
        fail(line_no, "malformed section header");
      continue;  // grouping only; keys stay global
    }
    std::size_t eq = std::string::npos;
    bool in_string = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
      if (line[i] == '"') in_string = !in_string;
      if (line[i] == '=' && !in_string) {
        eq = i;
        break;
      }
    }
    if (eq == std::string::npos) fail(line_no, "expected key = value");
    std::string key = trim(line.substr(0, eq));
    std::string val = trim(line.substr(eq + 1));
    if (!valid_key(key)) fail(line_no, "malformed key '" + key + "'");
    if (val.empty()) fail(line_no, "missing value for '" + key + "'");
    if (table.count(key)) fail(line_no, "duplicate key '" + key + "'");
    table[key] = val.front() == '[' ? parse_array(val, line_no)
                                    : parse_scalar(val, line_no);
  }
  return table;
}

TomlTable load_toml_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("config: cannot open '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_toml(buf.str());
}

std::vector<std::pair<int, double>> parse_milestones(const std::string& text) {
  std::vector<std::pair<int, double>> out;
  if (trim(text).empty()) return out;
  std::istringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    item = trim(item);
    std::size_t colon = item.find(':');
    if (colon == std::string::npos)
      throw std::runtime_error("lr milestones: expected epoch:lr, got '" + item + "'");
    int epoch = 0;
    double lr = 0.0;
    try {
      epoch = std::stoi(trim(item.substr(0, colon)));
      std::string lr_tok = trim(item.substr(colon + 1));
      std::size_t used = 0;
      lr = std::stod(lr_tok, &used);
      if (used != lr_tok.size()) throw std::invalid_argument(lr_tok);
    } catch (const std::exception&) {
      throw std::runtime_error("lr milestones: malformed entry '" + item + "'");
    }
    if (epoch < 1) throw std::runtime_error("lr milestones: epochs are 1-based");
    if (lr <= 0) throw std::runtime_error("lr milestones: lr must be positive");
    if (!out.empty() && epoch <= out.back().first)
      throw std::runtime_error("lr milestones: epochs must increase");
    out.emplace_back(epoch, lr);
  }
  return out;
}

namespace {

struct Field {
  enum Kind { Str, Int, Dbl, Bool, Seed } kind;
  void* ptr;
};

// Single source of truth for key <-> member binding, shared by the TOML
// loader and the JSON round trip.
std::map<std::string, Field> field_map(RunConfig& c) {
  return {
      {"subcommand", {Field::Str, &c.subcommand}},
      {"problem", {Field::Str, &c.problem}},
      {"manifold", {Field::Str, &c.manifold}},
      {"dataset", {Field::Str, &c.dataset}},
      {"bundle", {Field::Str, &c.bundle}},
      {"out", {Field::Str, &c.out}},
      {"strategy", {Field::Str, &c.strategy}},
      {"scheme", {Field::Str, &c.scheme}},
      {"shift", {Field::Str, &c.shift}},
      {"ks", {Field::Dbl, &c.ks}},
      {"latent", {Field::Int, &c.latent}},
      {"samples", {Field::Int, &c.samples}},
      {"ntime", {Field::Int, &c.ntime}},
      {"T", {Field::Dbl, &c.T}},
      {"store_rhs", {Field::Bool, &c.store_rhs}},
      {"epochs", {Field::Int, &c.epochs}},
      {"batch", {Field::Int, &c.batch}},
      {"lr", {Field::Dbl, &c.lr}},
      {"lr_milestones", {Field::Str, &c.lr_milestones}},
      {"eta1", {Field::Dbl, &c.eta1}},
      {"eta3", {Field::Dbl, &c.eta3}},
      {"conservation", {Field::Dbl, &c.conservation}},
      {"conservation_mass_defect", {Field::Bool, &c.conservation_mass_defect}},
      {"orthogonality", {Field::Dbl, &c.orthogonality}},
      {"dissipativity", {Field::Dbl, &c.dissipativity}},
      {"dissipativity_margin", {Field::Dbl, &c.dissipativity_margin}},
      {"dt", {Field::Dbl, &c.dt}},
      {"T_query", {Field::Dbl, &c.T_query}},
      {"s_min", {Field::Int, &c.s_min}},
      {"s_max", {Field::Int, &c.s_max}},
      {"schemes", {Field::Str, &c.schemes}},
      {"delta0", {Field::Dbl, &c.delta0}},
      {"big_delta0", {Field::Dbl, &c.big_delta0}},
      {"delta_lo", {Field::Dbl, &c.delta_lo}},
      {"delta_hi", {Field::Dbl, &c.delta_hi}},
      {"big_delta_lo", {Field::Dbl, &c.big_delta_lo}},
      {"big_delta_hi", {Field::Dbl, &c.big_delta_hi}},
      {"n_mu", {Field::Int, &c.n_mu}},
      {"count", {Field::Int, &c.count}},
      {"seed", {Field::Seed, &c.seed}},
      {"threads", {Field::Int, &c.threads}},
      {"paper_scale", {Field::Bool, &c.paper_scale}},
      {"force", {Field::Bool, &c.force}},
  };
}

}  // namespace

void RunConfig::apply_table(const TomlTable& table) {
  auto fields = field_map(*this);
  for (const auto& [key, value] : table) {
    auto it = fields.find(key);
    if (it == fields.end())
      throw std::runtime_error("config: unknown key '" + key + "'");
    const Field f = it->second;
    auto type_error = [&key]() -> std::runtime_error {
      return std::runtime_error("config: wrong type for key '" + key + "'");
    };
    switch (f.kind) {
      case Field::Str:
        if (!std::holds_alternative<std::string>(value)) throw type_error();
        *static_cast<std::string*>(f.ptr) = std::get<std::string>(value);
        break;
      case Field::Int:
        if (!std::holds_alternative<long long>(value)) throw type_error();
        *static_cast<int*>(f.ptr) = static_cast<int>(std::get<long long>(value));
        break;
      case Field::Dbl:
        if (std::holds_alternative<long long>(value))
          *static_cast<double*>(f.ptr) =
              static_cast<double>(std::get<long long>(value));
        else if (std::holds_alternative<double>(value))
          *static_cast<double*>(f.ptr) = std::get<double>(value);
        else
          throw type_error();
        break;
      case Field::Bool:
        if (!std::holds_alternative<bool>(value)) throw type_error();
        *static_cast<bool*>(f.ptr) = std::get<bool>(value);
        break;
      case Field::Seed:
        if (!std::holds_alternative<long long>(value)) throw type_error();
        *static_cast<std::uint64_t*>(f.ptr) =
            static_cast<std::uint64_t>(std::get<long long>(value));
        break;
    }
  }
}

nlohmann::json RunConfig::to_json() const {
  json j;
  auto fields = field_map(const_cast<RunConfig&>(*this));
  for (const auto& [key, f] : fields) {
    switch (f.kind) {
      case Field::Str: j[key] = *static_cast<const std::string*>(f.ptr); break;
      case Field::Int: j[key] = *static_cast<const int*>(f.ptr); break;
      case Field::Dbl: j[key] = *static_cast<const double*>(f.ptr); break;
      case Field::Bool: j[key] = *static_cast<const bool*>(f.ptr); break;
      case Field::Seed: j[key] = *static_cast<const std::uint64_t*>(f.ptr); break;
    }
  }
  return j;
}

RunConfig RunConfig::from_json(const nlohmann::json& j) {
  const json& cfg = j.contains("config") ? j.at("config") : j;
  RunConfig c;
  auto fields = field_map(c);
  for (const auto& [key, value] : cfg.items()) {
    auto it = fields.find(key);
    if (it == fields.end())
      throw std::runtime_error("config: unknown key '" + key + "' in JSON");
    const Field f = it->second;
    switch (f.kind) {
      case Field::Str: *static_cast<std::string*>(f.ptr) = value.get<std::string>(); break;
      case Field::Int: *static_cast<int*>(f.ptr) = value.get<int>(); break;
      case Field::Dbl: *static_cast<double*>(f.ptr) = value.get<double>(); break;
      case Field::Bool: *static_cast<bool*>(f.ptr) = value.get<bool>(); break;
      case Field::Seed: *static_cast<std::uint64_t*>(f.ptr) = value.get<std::uint64_t>(); break;
    }
  }
  return c;
}

RunConfig load_run_config(const std::string& path) {
  std::filesystem::path p(path);
  if (p.extension() == ".json") {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("config: cannot open '" + path + "'");
    json j;
    in >> j;
    return RunConfig::from_json(j);
  }
  RunConfig c;
  c.apply_table(load_toml_file(path));
  return c;
}

nlohmann::json versions_json() {
  json v;
  v["dre"] = kDreVersion;
  char eigen[32];
  std::snprintf(eigen, sizeof(eigen), "%d.%d.%d", EIGEN_WORLD_VERSION,
                EIGEN_MAJOR_VERSION, EIGEN_MINOR_VERSION);
  v["eigen"] = eigen;
  v["cxx_standard"] = static_cast<long long>(__cplusplus);
  return v;
}

void write_run_json(const RunConfig& resolved, const std::string& dir) {
  json j;
  j["format_version"] = 1;
  j["config"] = resolved.to_json();
  j["versions"] = versions_json();
  std::filesystem::create_directories(dir);
  std::ofstream out(std::filesystem::path(dir) / "run.json");
  if (!out)
    throw std::runtime_error("config: cannot write run.json under '" + dir + "'");
  out << j.dump(2) << "\n";
}

}  // namespace dre
