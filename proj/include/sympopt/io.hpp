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

#pragma once

#include <Eigen/Dense>

#include <string>

#include "sympopt/cost.hpp"
#include "sympopt/optimize.hpp"

namespace sympopt {

// ---------------------------------------------------------------------------
// Dense matrix files
//
// Plain text: a "rows cols" header line, then one whitespace-separated row
// per line.  Values are printed with 17 significant digits, enough for
// doubles to round-trip bit-for-bit.
// ---------------------------------------------------------------------------

void write_mat1(const std::string& path, const Eigen::MatrixXd& m);
Eigen::MatrixXd read_mat1(const std::string& path);

// ---------------------------------------------------------------------------
// CSV reports
// ---------------------------------------------------------------------------

/// Columns step,cost,grad_norm,elapsed_s; one row per cost call.  A leading
/// "# init: ..." comment records the starting-point provenance when known.
void write_trace_csv(const std::string& path, const ConvergenceTrace& trace);

/// Columns index,epsilon (ascending).
void write_spectrum_csv(const std::string& path, const Eigen::VectorXd& eps);

// ---------------------------------------------------------------------------
// Factor persistence
//
// A factors directory holds manifest.json (d, mode, k, provenance) next to
// m1.mat, m2.mat, m3.mat.  m1.mat is 1 x d in gap mode and the full
// symmetric matrix otherwise.
// ---------------------------------------------------------------------------

struct LoadedFactors {
  TriangularFactors factors;
  std::string provenance;
};

void save_factors(const std::string& dir, const TriangularFactors& f,
                  const std::string& provenance);
LoadedFactors load_factors(const std::string& dir);

}  // namespace sympopt
