// Copyright 2026 The sympopt authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "sympopt/io.hpp"

#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace sympopt {

namespace {

namespace fs = std::filesystem;

std::string format17(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string mode_name(FactorMode m) {
  switch (m) {
    case FactorMode::energy:
      return "energy";
    case FactorMode::gap:
      return "gap";
    case FactorMode::partial:
      return "partial";
  }
  throw InvalidInput("unknown factor mode");
}

FactorMode mode_from_name(const std::string& s) {
  if (s == "energy") return FactorMode::energy;
  if (s == "gap") return FactorMode::gap;
  if (s == "partial") return FactorMode::partial;
  throw InvalidInput("factors manifest: unknown mode '" + s + "'");
}

}  // namespace

void write_mat1(const std::string& path, const Eigen::MatrixXd& m) {
  std::ofstream out(path);
  if (!out) throw InvalidInput("write_mat1: cannot open '" + path + "'");
  out << m.rows() << ' ' << m.cols() << '\n';
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (j) out << ' ';
      out << format17(m(i, j));
    }
    out << '\n';
  }
  if (!out) throw InvalidInput("write_mat1: write to '" + path + "' failed");
}

Eigen::MatrixXd read_mat1(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("read_mat1: cannot open '" + path + "'");
  Eigen::Index rows = 0, cols = 0;
  if (!(in >> rows >> cols) || rows < 1 || cols < 1)
    throw InvalidInput("read_mat1: bad header in '" + path + "'");
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j)
      if (!(in >> m(i, j)))
        throw InvalidInput("read_mat1: truncated or non-numeric data in '" +
                           path + "'");
  double extra;
  if (in >> extra)
    throw InvalidInput("read_mat1: trailing data in '" + path + "'");
  return m;
}

void write_trace_csv(const std::string& path, const ConvergenceTrace& trace) {
  std::ofstream out(path);
  if (!out) throw InvalidInput("write_trace_csv: cannot open '" + path + "'");
  if (!trace.init_note.empty()) out << "# init: " << trace.init_note << '\n';
  out << "step,cost,grad_norm,elapsed_s\n";
  for (const auto& r : trace.records) {
    out << r.step << ',' << format17(r.cost) << ',' << format17(r.grad_norm)
        << ',' << format17(r.elapsed_s) << '\n';
  }
  if (!out)
    throw InvalidInput("write_trace_csv: write to '" + path + "' failed");
}

void write_spectrum_csv(const std::string& path, const Eigen::VectorXd& eps) {
  std::ofstream out(path);
  if (!out)
    throw InvalidInput("write_spectrum_csv: cannot open '" + path + "'");
  out << "index,epsilon\n";
  for (Eigen::Index i = 0; i < eps.size(); ++i)
    out << i << ',' << format17(eps(i)) << '\n';
  if (!out)
    throw InvalidInput("write_spectrum_csv: write to '" + path + "' failed");
}

void save_factors(const std::string& dir, const TriangularFactors& f,
                  const std::string& provenance) {
  f.check_consistent();
  fs::create_directories(dir);
  nlohmann::json manifest = {
      {"d", f.d},
      {"mode", mode_name(f.mode)},
      {"k", f.k},
      {"provenance", provenance},
  };
  {
    std::ofstream out(fs::path(dir) / "manifest.json");
    if (!out)
      throw InvalidInput("save_factors: cannot write manifest in '" + dir +
                         "'");
    out << manifest.dump(2) << '\n';
  }
  Eigen::MatrixXd m1;
  if (f.mode == FactorMode::gap)
    m1 = f.m1_row().transpose();
  else
    m1 = f.m1_matrix();
  write_mat1((fs::path(dir) / "m1.mat").string(), m1);
  write_mat1((fs::path(dir) / "m2.mat").string(), f.m2_matrix());
  write_mat1((fs::path(dir) / "m3.mat").string(), f.m3_matrix());
}

LoadedFactors load_factors(const std::string& dir) {
  const fs::path base(dir);
  std::ifstream in(base / "manifest.json");
  if (!in)
    throw InvalidInput("load_factors: cannot open manifest in '" + dir + "'");
  nlohmann::json manifest;
  try {
    in >> manifest;
  } catch (const nlohmann::json::exception& e) {
    throw InvalidInput("load_factors: bad manifest in '" + dir +
                       "': " + e.what());
  }
  if (!manifest.contains("d") || !manifest.contains("mode") ||
      !manifest.contains("k"))
    throw InvalidInput("load_factors: manifest missing fields in '" + dir +
                       "'");
  const Index d = manifest["d"].get<Index>();
  const Index k = manifest["k"].get<Index>();
  const FactorMode mode = mode_from_name(manifest["mode"].get<std::string>());

  const Eigen::MatrixXd m1 = read_mat1((base / "m1.mat").string());
  const Eigen::MatrixXd m2 = read_mat1((base / "m2.mat").string());
  const Eigen::MatrixXd m3 = read_mat1((base / "m3.mat").string());

  TriangularFactors f;
  if (mode == FactorMode::gap) {
    if (m1.rows() != 1 || m1.cols() != d)
      throw InvalidInput("load_factors: gap-mode m1.mat must be 1 x d");
    f = TriangularFactors::gap_from_parts(m1.row(0).transpose(), m2, m3);
  } else if (mode == FactorMode::partial) {
    f = TriangularFactors::partial_from_matrices(k, m1, m2, m3);
  } else {
    f = TriangularFactors::from_matrices(m1, m2, m3);
  }
  if (f.d != d || f.k != k)
    throw InvalidInput("load_factors: manifest disagrees with matrix files");

  LoadedFactors out;
  out.factors = std::move(f);
  out.provenance = manifest.value("provenance", "");
  return out;
}

}  // namespace sympopt
