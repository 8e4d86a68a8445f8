#include "dre/dataset.hpp"

#include <algorithm>
#include <cinttypes>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>

#include "json.hpp"

namespace dre {

namespace fs = std::filesystem;
using nlohmann::json;

void TrajectoryDataset::validate() const {
  const size_t n = states.size();
  if (mus.size() != n) throw std::runtime_error("dataset: mu count mismatch");
  if (has_rhs && rhs_values.size() != n)
    throw std::runtime_error("dataset: rhs stored for only part of the samples");
  if (!has_rhs && !rhs_values.empty())
    throw std::runtime_error("dataset: unexpected rhs values");
  if (train_idx.size() + val_idx.size() + test_idx.size() != n)
    throw std::runtime_error("dataset: split does not cover the samples");
  for (const auto& s : states)
    if (s.rows() != n_time || s.cols() != dim())
      throw std::runtime_error("dataset: inconsistent trajectory shape");
  if (n_time < 2) throw std::runtime_error("dataset: need at least 2 snapshots");
}

Matrix TrajectoryDataset::train_snapshots() const {
  Matrix out(static_cast<Eigen::Index>(train_idx.size()) * n_time, dim());
  Eigen::Index r = 0;
  for (int i : train_idx) {
    out.middleRows(r, n_time) = states[i];
    r += n_time;
  }
  return out;
}

TrajectoryDataset generate_dataset(const OdeProblem& problem, SplitCounts split,
                                   int n_time, double T, bool store_rhs,
                                   std::uint64_t seed, double atol, double rtol,
                                   bool allow_small_splits) {
  if (split.n_train < 1 || split.n_val < 0 || split.n_test < 0)
    throw std::invalid_argument("generate_dataset: bad split counts");
  if (n_time < 2) throw std::invalid_argument("generate_dataset: n_time must be >= 2");
  if (!(T > 0.0)) throw std::invalid_argument("generate_dataset: T must be positive");
  const int total = split.total();
  const bool small = split.n_val * 10 < total || split.n_test * 10 < total;
  if (small) {
    if (!allow_small_splits)
      throw std::invalid_argument(
          "generate_dataset: val and test must each hold at least 10% of the samples");
    std::cerr << "warning: val/test splits below 10% of total samples\n";
  }

  TrajectoryDataset data;
  data.problem_name = problem.name;
  data.seed = seed;
  data.T = T;
  data.n_time = n_time;
  data.dt = T / (n_time - 1);
  data.has_rhs = store_rhs;

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  for (int i = 0; i < total; ++i) {
    Vector mu(problem.param_dim);
    for (int d = 0; d < problem.param_dim; ++d) {
      const double lo = problem.param_box(d, 0), hi = problem.param_box(d, 1);
      mu[d] = lo + (hi - lo) * uni(rng);
    }
    data.mus.push_back(mu);
  }

  for (int i = 0; i < total; ++i) {
    const Vector& mu = data.mus[i];
    try {
      DenseSolution sol =
          integrate_reference(problem.rhs_at(mu), problem.initial(mu), 0.0, T, atol, rtol);
      data.states.push_back(sol.sample_grid(data.dt, n_time - 1));
    } catch (const std::exception& e) {
      std::ostringstream mu_str;
      mu_str << mu.transpose();
      throw std::runtime_error("generate_dataset: sample " + std::to_string(i) +
                               " (mu = [" + mu_str.str() + "]) failed: " + e.what());
    }
    if (store_rhs) {
      Matrix f(n_time, problem.dim);
      for (int j = 0; j < n_time; ++j)
        f.row(j) = problem.rhs(data.states[i].row(j).transpose(), mu);
      data.rhs_values.push_back(std::move(f));
    }
  }

  for (int i = 0; i < split.n_train; ++i) data.train_idx.push_back(i);
  for (int i = 0; i < split.n_val; ++i) data.val_idx.push_back(split.n_train + i);
  for (int i = 0; i < split.n_test; ++i)
    data.test_idx.push_back(split.n_train + split.n_val + i);
  data.validate();
  return data;
}

namespace {

std::string format_g17(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

void save_dataset(const TrajectoryDataset& data, const std::string& dir) {
  data.validate();
  fs::create_directories(dir);
  json j;
  j["format_version"] = 1;
  j["problem"] = data.problem_name;
  j["seed"] = data.seed;
  j["dt_train"] = data.dt;
  j["T"] = data.T;
  j["n_time"] = data.n_time;
  j["n_samples"] = data.n_samples();
  j["store_rhs"] = data.has_rhs;
  j["split"] = {{"train", data.train_idx}, {"val", data.val_idx}, {"test", data.test_idx}};
  json mus = json::array();
  for (const auto& mu : data.mus)
    mus.push_back(std::vector<double>(mu.data(), mu.data() + mu.size()));
  j["mu"] = mus;
  std::ofstream mf(fs::path(dir) / "manifest.json");
  if (!mf) throw std::runtime_error("save_dataset: cannot write manifest in '" + dir + "'");
  mf << j.dump(2) << "\n";

  const int N = data.dim();
  for (int i = 0; i < data.n_samples(); ++i) {
    char name[32];
    std::snprintf(name, sizeof(name), "traj_%04d.csv", i);
    std::ofstream out(fs::path(dir) / name);
    out << "t";
    for (int c = 1; c <= N; ++c) out << ",u_" << c;
    if (data.has_rhs)
      for (int c = 1; c <= N; ++c) out << ",f_" << c;
    out << "\n";
    for (int k = 0; k < data.n_time; ++k) {
      out << format_g17(data.time_at(k));
      for (int c = 0; c < N; ++c) out << "," << format_g17(data.states[i](k, c));
      if (data.has_rhs)
        for (int c = 0; c < N; ++c) out << "," << format_g17(data.rhs_values[i](k, c));
      out << "\n";
    }
  }
}

TrajectoryDataset load_dataset(const std::string& dir) {
  std::ifstream mf(fs::path(dir) / "manifest.json");
  if (!mf) throw std::runtime_error("load_dataset: cannot open manifest in '" + dir + "'");
  json j;
  mf >> j;
  if (j.value("format_version", 0) != 1)
    throw std::runtime_error("load_dataset: unsupported format_version");

  TrajectoryDataset data;
  data.problem_name = j.at("problem").get<std::string>();
  data.seed = j.at("seed").get<std::uint64_t>();
  data.dt = j.at("dt_train").get<double>();
  data.T = j.at("T").get<double>();
  data.n_time = j.at("n_time").get<int>();
  data.has_rhs = j.at("store_rhs").get<bool>();
  data.train_idx = j.at("split").at("train").get<std::vector<int>>();
  data.val_idx = j.at("split").at("val").get<std::vector<int>>();
  data.test_idx = j.at("split").at("test").get<std::vector<int>>();
  const int total = j.at("n_samples").get<int>();
  for (const auto& m : j.at("mu")) {
    auto v = m.get<std::vector<double>>();
    data.mus.push_back(Eigen::Map<const Vector>(v.data(), v.size()));
  }

  for (int i = 0; i < total; ++i) {
    char name[32];
    std::snprintf(name, sizeof(name), "traj_%04d.csv", i);
    std::ifstream in(fs::path(dir) / name);
    if (!in) throw std::runtime_error(std::string("load_dataset: missing ") + name);
    std::string line;
    std::getline(in, line);  // header
    const size_t cols = 1 + std::count(line.begin(), line.end(), ',');
    const int N = static_cast<int>(data.has_rhs ? (cols - 1) / 2 : cols - 1);
    Matrix u(data.n_time, N), f(data.n_time, N);
    for (int k = 0; k < data.n_time; ++k) {
      if (!std::getline(in, line))
        throw std::runtime_error(std::string("load_dataset: truncated ") + name);
      std::stringstream ss(line);
      std::string cell;
      std::getline(ss, cell, ',');  // t column; spacing is implied by the manifest
      for (int c = 0; c < N; ++c) {
        std::getline(ss, cell, ',');
        u(k, c) = std::stod(cell);
      }
      if (data.has_rhs)
        for (int c = 0; c < N; ++c) {
          std::getline(ss, cell, ',');
          f(k, c) = std::stod(cell);
        }
    }
    data.states.push_back(std::move(u));
    if (data.has_rhs) data.rhs_values.push_back(std::move(f));
  }
  data.validate();
  return data;
}

}  // namespace dre
