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

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <utility>
#include <vector>

#include <sympopt/gaussian.hpp>
#include <sympopt/hamiltonian.hpp>
#include <sympopt/io.hpp>
#include <sympopt/opcount.hpp>
#include <sympopt/optimize.hpp>

namespace fs = std::filesystem;
using nlohmann::json;
using namespace sympopt;

namespace {

std::string fmt17(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

// shortest decimal that round-trips; used for path components
std::string fmt_short(double v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string fnv8(const std::string& s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%08llx",
                static_cast<unsigned long long>(h & 0xffffffffull));
  return buf;
}

struct Options {
  std::string task;
  std::vector<Index> dims;
  double rho = 2.0;
  double c = 0.0;
  std::string file;
  Index k = 1;
  std::string method = "cg";
  double tol = 1e-5;
  long max_steps = 20000;
  double learning_rate = 0.26;
  double momentum = 0.95;
  std::string init;  // empty = task default
  std::string warm_path;
  bool oracle = false;
  std::string out_dir;
  std::uint64_t seed = 0;
  std::vector<double> rho_list;
  std::string config_path;
  std::string dir;           // compare: directory of an earlier run
  std::string mode = "all";  // gradcheck
};

// Flags override config-file values: any option the parser saw keeps its
// command-line value, everything else can be filled in from the JSON file.
void merge_config(const CLI::App& app, Options& o) {
  if (o.config_path.empty()) return;
  std::ifstream in(o.config_path);
  if (!in)
    throw InvalidInput("cannot open config file '" + o.config_path + "'");
  json cfg;
  try {
    in >> cfg;
  } catch (const json::exception& e) {
    throw InvalidInput("bad JSON in '" + o.config_path + "': " + e.what());
  }

  auto given = [&](const std::string& flag) {
    auto* opt = app.get_option_no_throw(flag);
    return opt != nullptr && opt->count() > 0;
  };
  for (const auto& [key, val] : cfg.items()) {
    try {
      if (key == "task") {
        if (o.task.empty()) o.task = val.get<std::string>();
      } else if (key == "dims") {
        if (!given("--dims")) o.dims = val.get<std::vector<Index>>();
      } else if (key == "rho") {
        if (!given("--rho")) o.rho = val.get<double>();
      } else if (key == "c") {
        if (!given("--c")) o.c = val.get<double>();
      } else if (key == "file") {
        if (!given("--file")) o.file = val.get<std::string>();
      } else if (key == "k") {
        if (!given("--k")) o.k = val.get<Index>();
      } else if (key == "method") {
        if (!given("--method")) o.method = val.get<std::string>();
      } else if (key == "tol") {
        if (!given("--tol")) o.tol = val.get<double>();
      } else if (key == "max_steps") {
        if (!given("--max-steps")) o.max_steps = val.get<long>();
      } else if (key == "learning_rate") {
        if (!given("--lr")) o.learning_rate = val.get<double>();
      } else if (key == "momentum") {
        if (!given("--momentum")) o.momentum = val.get<double>();
      } else if (key == "init") {
        if (!given("--init")) o.init = val.get<std::string>();
      } else if (key == "warm_path") {
        if (!given("--warm-path")) o.warm_path = val.get<std::string>();
      } else if (key == "oracle") {
        if (!given("--oracle")) o.oracle = val.get<bool>();
      } else if (key == "out_dir") {
        if (!given("--out-dir")) o.out_dir = val.get<std::string>();
      } else if (key == "seed") {
        if (!given("--seed")) o.seed = val.get<std::uint64_t>();
      } else if (key == "rho_list") {
        if (!given("--rho-list")) o.rho_list = val.get<std::vector<double>>();
      } else if (key == "mode") {
        if (!given("--mode")) o.mode = val.get<std::string>();
      } else if (key == "dir") {
        if (!given("--dir")) o.dir = val.get<std::string>();
      } else {
        throw InvalidInput("config key '" + key + "' is not recognized");
      }
    } catch (const json::exception& e) {
      throw InvalidInput("config key '" + key + "': " + e.what());
    }
  }
}

QuadraticHamiltonian build_problem(const Options& o, double rho) {
  if (!o.dims.empty() && !o.file.empty())
    throw InvalidInput("give either --dims or --file, not both");
  if (o.dims.empty() && o.file.empty())
    throw InvalidInput("no problem given: use --dims or --file");
  if (!o.file.empty()) return load_hamiltonian(o.file);
  LatticeSpec spec{o.dims, rho, o.c};
  return build_qdo(spec);
}

json problem_record(const Options& o, const QuadraticHamiltonian& h,
                    double rho) {
  json p;
  if (!o.file.empty()) {
    p["source"] = "file";
    p["file"] = o.file;
  } else {
    p["source"] = "lattice";
    p["dims"] = o.dims;
    p["rho"] = rho;
    p["c"] = o.c;
  }
  p["d"] = h.d;
  return p;
}

OptimizerConfig optimizer_config(const Options& o) {
  OptimizerConfig cfg;
  if (o.method == "cg")
    cfg.method = OptMethod::cg;
  else if (o.method == "gd" || o.method == "gd_momentum")
    cfg.method = OptMethod::gd_momentum;
  else
    throw InvalidInput("unknown method '" + o.method + "' (cg or gd)");
  cfg.tol = o.tol;
  cfg.max_steps = o.max_steps;
  cfg.learning_rate = o.learning_rate;
  cfg.momentum = o.momentum;
  cfg.validate();
  return cfg;
}

json optimizer_record(const Options& o) {
  return {{"method", o.method},        {"tol", o.tol},
          {"max_steps", o.max_steps},  {"learning_rate", o.learning_rate},
          {"momentum", o.momentum},    {"seed", o.seed}};
}

std::string default_init(const std::string& task) {
  return task == "solve" ? "gamma_t" : "random";
}

TriangularFactors make_init(const std::string& init,
                            const QuadraticHamiltonian& h, FactorMode mode,
                            Index k, std::uint64_t seed) {
  if (init == "gamma_t") return init_gamma_t(h, mode, k);
  if (init == "zero") return init_zero(h, mode, k);
  if (init == "random") return init_random(h, mode, k, seed);
  if (init.rfind("warm:", 0) == 0)
    return warm_start_factors(init.substr(5), h, mode, k);
  throw InvalidInput("unknown init '" + init +
                     "' (gamma_t, zero, random, or warm:<dir>)");
}

const char* status_name(OptStatus s) {
  switch (s) {
    case OptStatus::converged:
      return "converged";
    case OptStatus::step_cap:
      return "step_cap";
    case OptStatus::line_search_failure:
      return "line_search_failure";
  }
  return "unknown";
}

// Distinct runs land in distinct directories so concurrent sweeps cannot
// trample each other: the name carries the task and a hash of the full
// effective configuration.
std::string default_out_dir(const Options& o) {
  json fingerprint = {
      {"task", o.task},       {"dims", o.dims},
      {"rho", o.rho},         {"c", o.c},
      {"file", o.file},       {"k", o.k},
      {"method", o.method},   {"tol", o.tol},
      {"max_steps", o.max_steps}, {"learning_rate", o.learning_rate},
      {"momentum", o.momentum},   {"init", o.init},
      {"seed", o.seed},       {"rho_list", o.rho_list},
  };
  std::string label = o.task;
  if (!o.dims.empty()) {
    label += "_d";
    for (size_t i = 0; i < o.dims.size(); ++i)
      label += (i ? "x" : "") + std::to_string(o.dims[i]);
  } else if (!o.file.empty()) {
    label += "_" + fs::path(o.file).stem().string();
  }
  return (fs::path("sympopt_out") / (label + "_" + fnv8(fingerprint.dump())))
      .string();
}

void write_result(const fs::path& dir, const json& record) {
  fs::create_directories(dir);
  std::ofstream out(dir / "result.json");
  if (!out)
    throw InvalidInput("cannot write '" + (dir / "result.json").string() +
                       "'");
  out << record.dump(2) << '\n';
}

void print_opcounts() {
  if (!opcount::enabled()) return;
  auto s = opcount::snapshot();
  std::cout << "ops: products=" << s.products << " max_dim=" << s.max_dim
            << " max_result=" << s.max_result << "\n";
}

// --------------------------------------------------------------------------
// Tasks
// --------------------------------------------------------------------------

struct RunArtifacts {
  SolveResult result;
  double wall_s = 0.0;
};

RunArtifacts run_minimize(const QuadraticHamiltonian& h, FactorMode mode,
                          Index k, const std::string& init,
                          const Options& o) {
  const OptimizerConfig cfg = optimizer_config(o);
  TriangularFactors start = make_init(init, h, mode, k, o.seed);
  const auto t0 = std::chrono::steady_clock::now();
  RunArtifacts a;
  a.result = mode == FactorMode::energy ? minimize_energy(h, start, cfg)
                                        : minimize_partial(h, start, cfg);
  a.wall_s = std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                           t0)
                 .count();
  a.result.trace.init_note = init;
  return a;
}

void persist_common(const fs::path& dir, const RunArtifacts& a,
                    const std::string& provenance) {
  fs::create_directories(dir);
  write_trace_csv((dir / "trace.csv").string(), a.result.trace);
  save_factors((dir / "factors").string(), a.result.factors, provenance);
}

json run_record(const std::string& task, const Options& o,
                const QuadraticHamiltonian& h, double rho,
                const RunArtifacts& a, const std::string& init) {
  json r;
  r["task"] = task;
  r["problem"] = problem_record(o, h, rho);
  r["optimizer"] = optimizer_record(o);
  r["init"] = init;
  r["cost"] = a.result.cost;
  r["status"] = status_name(a.result.trace.status);
  r["cost_calls"] = a.result.trace.records.size();
  r["accepted_iterations"] = a.result.trace.iterations;
  r["wall_time_s"] = a.wall_s;
  return r;
}

int cmd_solve_one(const Options& o, double rho, const fs::path& dir,
                  const std::string& init) {
  auto h = build_problem(o, rho);
  auto a = run_minimize(h, FactorMode::energy, h.d, init, o);
  persist_common(dir, a, "task=solve init=" + init);
  write_mat1((dir / "gamma_sopt.mat").string(),
             factors_to_cm(a.result.factors));

  json r = run_record("solve", o, h, rho, a, init);
  r["e0_sopt"] = a.result.cost;
  r["artifacts"] = {{"factors", "factors"},
                    {"trace", "trace.csv"},
                    {"gamma", "gamma_sopt.mat"}};

  std::cout << "d = " << h.d << "\n";
  std::cout << "E0_sopt = " << fmt17(a.result.cost) << "\n";
  std::cout << "status = " << status_name(a.result.trace.status)
            << "  calls = " << a.result.trace.records.size()
            << "  accepted = " << a.result.trace.iterations << "\n";

  if (o.oracle) {
    auto sd = symplectic_spectrum(h.h);
    json oracle = {{"reference", "symplectic_diagonalization"},
                   {"e0_sd", sd.e0()},
                   {"gap_sd", sd.gap()}};
    json errors = {{"solver_tol", o.tol},
                   {"e0_abs_error", std::abs(a.result.cost - sd.e0())}};
    std::cout << "E0_SD = " << fmt17(sd.e0()) << "\n";
    std::cout << "e0_abs_error = " << fmt17(std::abs(a.result.cost - sd.e0()))
              << "\n";
    if (h.structure == HamiltonianStructure::block_diagonal) {
      const Eigen::MatrixXd gamma_sd = block_diagonal_ground_cm(h.v).gamma;
      const double fro =
          (factors_to_cm(a.result.factors) - gamma_sd).norm();
      errors["cm_frobenius_error"] = fro;
      std::cout << "cm_frobenius_error = " << fmt17(fro) << "\n";
    }
    oracle["errors"] = errors;
    r["oracle"] = oracle;
  }
  write_result(dir, r);
  std::cout << "out: " << dir.string() << "\n";
  print_opcounts();
  return 0;
}

int cmd_gap_one(const Options& o, double rho, const fs::path& dir,
                const std::string& init) {
  auto h = build_problem(o, rho);
  auto a = run_minimize(h, FactorMode::gap, 1, init, o);
  persist_common(dir, a, "task=gap init=" + init);

  const double estimate = gap_estimate(a.result.cost);
  json r = run_record("gap", o, h, rho, a, init);
  r["gap_estimate"] = estimate;
  r["artifacts"] = {{"factors", "factors"}, {"trace", "trace.csv"}};

  std::cout << "d = " << h.d << "\n";
  std::cout << "gap_estimate = " << fmt17(estimate) << "\n";
  std::cout << "status = " << status_name(a.result.trace.status)
            << "  calls = " << a.result.trace.records.size()
            << "  accepted = " << a.result.trace.iterations << "\n";

  if (o.oracle) {
    auto sd = symplectic_spectrum(h.h);
    r["oracle"] = {{"reference", "symplectic_diagonalization"},
                   {"gap_sd", sd.gap()},
                   {"errors",
                    {{"solver_tol", o.tol},
                     {"gap_residual", estimate - sd.gap()}}}};
    std::cout << "gap_SD = " << fmt17(sd.gap()) << "\n";
    std::cout << "gap_residual = " << fmt17(estimate - sd.gap()) << "\n";
  }
  write_result(dir, r);
  std::cout << "out: " << dir.string() << "\n";
  print_opcounts();
  return 0;
}

int cmd_partial(const Options& o, const fs::path& dir,
                const std::string& init) {
  auto h = build_problem(o, o.rho);
  if (o.k < 1 || o.k > h.d)
    throw InvalidInput("partial: k must lie in [1, d]");
  if (init.rfind("warm:", 0) == 0)
    throw InvalidInput(
        "partial runs every pair count from 1 to k and cannot share one "
        "warm start; use gamma_t, zero or random");

  // One optimization per leading-pair count; successive sums difference
  // into the individual symplectic eigenvalues.
  std::vector<double> sums;
  std::vector<double> eps_est;
  std::vector<std::string> statuses;
  std::vector<long> calls;
  RunArtifacts last;
  for (Index j = 1; j <= o.k; ++j) {
    const FactorMode mode = j == 1 ? FactorMode::gap : FactorMode::partial;
    auto a = run_minimize(h, mode, j, init, o);
    sums.push_back(2.0 * a.result.cost);
    eps_est.push_back(sums.back() - (j > 1 ? sums[j - 2] : 0.0));
    statuses.push_back(status_name(a.result.trace.status));
    calls.push_back(long(a.result.trace.records.size()));
    if (j == o.k) last = std::move(a);
  }
  persist_common(dir, last, "task=partial init=" + init);

  json r = run_record("partial", o, h, o.rho, last, init);
  r["k"] = o.k;
  r["partial_sums"] = sums;
  r["eps_estimates"] = eps_est;
  r["per_k_status"] = statuses;
  r["per_k_calls"] = calls;
  r["artifacts"] = {{"factors", "factors"}, {"trace", "trace.csv"}};

  std::cout << "d = " << h.d << "\n";
  for (Index j = 1; j <= o.k; ++j) {
    std::cout << "sum_" << j << " = " << fmt17(sums[j - 1])
              << "  eps_" << j << " = " << fmt17(eps_est[j - 1]) << "  ("
              << statuses[j - 1] << ", " << calls[j - 1] << " calls)\n";
  }

  if (o.oracle) {
    auto sd = symplectic_spectrum(h.h);
    std::vector<double> eps_sd(sd.eps.data(), sd.eps.data() + o.k);
    double max_err = 0.0;
    for (Index j = 0; j < o.k; ++j)
      max_err = std::max(max_err, std::abs(eps_est[j] - eps_sd[j]));
    r["oracle"] = {{"reference", "symplectic_diagonalization"},
                   {"eps_sd", eps_sd},
                   {"errors",
                    {{"solver_tol", o.tol},
                     {"max_eps_abs_error", max_err}}}};
    for (Index j = 0; j < o.k; ++j)
      std::cout << "eps_SD_" << (j + 1) << " = " << fmt17(eps_sd[j]) << "\n";
    std::cout << "max_eps_abs_error = " << fmt17(max_err) << "\n";
  }
  write_result(dir, r);
  std::cout << "out: " << dir.string() << "\n";
  print_opcounts();
  return 0;
}

int cmd_diagonalize(const Options& o, const fs::path& dir) {
  auto h = build_problem(o, o.rho);
  auto sd = symplectic_spectrum(h.h);
  fs::create_directories(dir);
  write_spectrum_csv((dir / "spectrum_sd.csv").string(), sd.eps);

  json r;
  r["task"] = "diagonalize";
  r["problem"] = problem_record(o, h, o.rho);
  r["e0_sd"] = sd.e0();
  r["gap_sd"] = sd.gap();
  r["artifacts"] = {{"spectrum", "spectrum_sd.csv"}};
  if (h.structure == HamiltonianStructure::block_diagonal) {
    write_mat1((dir / "gamma_sd.mat").string(),
               block_diagonal_ground_cm(h.v).gamma);
    r["artifacts"]["gamma"] = "gamma_sd.mat";
  }
  write_result(dir, r);

  std::cout << "d = " << h.d << "\n";
  std::cout << "E0_SD = " << fmt17(sd.e0()) << "\n";
  std::cout << "gap_SD = " << fmt17(sd.gap()) << "\n";
  std::cout << "out: " << dir.string() << "\n";
  return 0;
}

int cmd_gradcheck(const Options& o) {
  auto h = build_problem(o, o.rho);
  if (h.d > 8)
    throw InvalidInput(
        "gradcheck: finite differences are limited to d <= 8 (got d = " +
        std::to_string(h.d) + ")");

  std::vector<std::pair<FactorMode, Index>> jobs;
  const Index pk = h.d >= 2 ? 2 : 1;
  if (o.mode == "all") {
    jobs = {{FactorMode::energy, h.d},
            {FactorMode::gap, 1},
            {FactorMode::partial, pk}};
  } else if (o.mode == "energy") {
    jobs = {{FactorMode::energy, h.d}};
  } else if (o.mode == "gap") {
    jobs = {{FactorMode::gap, 1}};
  } else if (o.mode == "partial") {
    jobs = {{FactorMode::partial, o.k >= 1 && o.k <= h.d ? o.k : pk}};
  } else {
    throw InvalidInput("gradcheck: mode must be energy, gap, partial or all");
  }

  bool ok = true;
  for (const auto& [mode, k] : jobs) {
    auto report = check_gradients(h, mode, k, o.seed);
    const char* mode_name = mode == FactorMode::energy ? "energy"
                            : mode == FactorMode::gap  ? "gap"
                                                       : "partial";
    for (const auto& b : report.blocks) {
      std::cout << mode_name << "/" << b.name
                << ": max_rel = " << fmt17(b.max_rel)
                << (b.max_rel <= 1e-6 ? "  ok" : "  FAIL") << "\n";
    }
    ok = ok && report.pass(1e-6);
  }
  std::cout << (ok ? "gradcheck: ok" : "gradcheck: FAIL") << "\n";
  return ok ? 0 : 2;
}

// Reload a finished run, rebuild the problem it recorded, and recompute the
// headline numbers from the persisted factors; disagreement means the
// artifacts do not describe the run.
int cmd_compare(const Options& o) {
  if (o.dir.empty()) throw InvalidInput("compare: give --dir <run directory>");
  const fs::path dir(o.dir);
  std::ifstream in(dir / "result.json");
  if (!in)
    throw InvalidInput("compare: cannot open '" +
                       (dir / "result.json").string() + "'");
  json r;
  try {
    in >> r;
  } catch (const json::exception& e) {
    throw InvalidInput(std::string("compare: bad result.json: ") + e.what());
  }

  const std::string task = r.at("task").get<std::string>();
  const json& p = r.at("problem");
  QuadraticHamiltonian h =
      p.at("source") == "file"
          ? load_hamiltonian(p.at("file").get<std::string>())
          : build_qdo({p.at("dims").get<std::vector<Index>>(),
                       p.at("rho").get<double>(), p.at("c").get<double>()});

  bool ok = true;
  auto check = [&](const std::string& name, double recorded,
                   double recomputed) {
    const double diff = std::abs(recorded - recomputed);
    const bool fine = diff <= 1e-9 * std::max(1.0, std::abs(recorded));
    ok = ok && fine;
    std::cout << name << ": recorded = " << fmt17(recorded)
              << "  recomputed = " << fmt17(recomputed)
              << "  |diff| = " << fmt17(diff) << (fine ? "" : "  MISMATCH")
              << "\n";
  };

  auto sd = symplectic_spectrum(h.h);
  if (task == "diagonalize") {
    check("e0_sd", r.at("e0_sd").get<double>(), sd.e0());
    check("gap_sd", r.at("gap_sd").get<double>(), sd.gap());
  } else if (task == "solve" || task == "gap" || task == "partial") {
    auto loaded = load_factors((dir / "factors").string());
    const Index k = loaded.factors.k;
    const double cost = loaded.factors.mode == FactorMode::energy
                            ? energy_cost(loaded.factors, h)
                            : partial_cost(loaded.factors, h, k);
    check("cost", r.at("cost").get<double>(), cost);
    if (task == "solve") {
      check("e0_sopt", r.at("e0_sopt").get<double>(), cost);
      if (r.contains("oracle"))
        check("oracle.e0_sd", r["oracle"].at("e0_sd").get<double>(), sd.e0());
    } else if (task == "gap") {
      check("gap_estimate", r.at("gap_estimate").get<double>(),
            gap_estimate(cost));
      if (r.contains("oracle"))
        check("oracle.gap_sd", r["oracle"].at("gap_sd").get<double>(),
              sd.gap());
    } else {
      const auto sums = r.at("partial_sums").get<std::vector<double>>();
      if (sums.empty()) throw InvalidInput("compare: empty partial_sums");
      check("last_partial_sum", sums.back(), 2.0 * cost);
    }
  } else {
    throw InvalidInput("compare: unsupported task '" + task + "'");
  }

  std::cout << (ok ? "compare: ok" : "compare: MISMATCH") << "\n";
  return ok ? 0 : 2;
}

int dispatch(Options& o) {
  static const std::vector<std::string> tasks = {
      "solve", "gap", "partial", "diagonalize", "gradcheck", "compare"};
  if (o.task.empty())
    throw InvalidInput(
        "no task given (solve, gap, partial, diagonalize, gradcheck, "
        "compare)");
  if (std::find(tasks.begin(), tasks.end(), o.task) == tasks.end())
    throw InvalidInput("unknown task '" + o.task + "'");

  if (!o.warm_path.empty()) {
    if (!o.init.empty() && o.init.rfind("warm:", 0) != 0)
      throw InvalidInput("--warm-path conflicts with --init " + o.init);
    o.init = "warm:" + o.warm_path;
  }
  if (o.init.empty()) o.init = default_init(o.task);

  if (o.task == "gradcheck") return cmd_gradcheck(o);
  if (o.task == "compare") return cmd_compare(o);

  const fs::path out_dir(o.out_dir.empty() ? default_out_dir(o) : o.out_dir);

  if (!o.rho_list.empty()) {
    if (o.task != "solve" && o.task != "gap")
      throw InvalidInput("--rho-list applies to solve and gap only");
    if (o.dims.empty())
      throw InvalidInput("--rho-list needs a lattice problem (--dims)");
    // Sweeps chain: each density reuses the previous optimum as its start.
    std::string init = o.init;
    for (double rho : o.rho_list) {
      const fs::path dir = out_dir / ("rho_" + fmt_short(rho));
      std::cout << "--- rho = " << fmt_short(rho) << " ---\n";
      const int rc = o.task == "solve" ? cmd_solve_one(o, rho, dir, init)
                                       : cmd_gap_one(o, rho, dir, init);
      if (rc != 0) return rc;
      init = "warm:" + (dir / "factors").string();
    }
    return 0;
  }

  if (o.task == "solve") return cmd_solve_one(o, o.rho, out_dir, o.init);
  if (o.task == "gap") return cmd_gap_one(o, o.rho, out_dir, o.init);
  if (o.task == "partial") return cmd_partial(o, out_dir, o.init);
  return cmd_diagonalize(o, out_dir);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "sympopt: ground states, spectral gaps and partial symplectic spectra "
      "of quadratic bosonic Hamiltonians by unconstrained symplectic "
      "optimization"};
  Options o;

  app.add_option("task", o.task,
                 "solve | gap | partial | diagonalize | gradcheck | compare");
  app.add_option("--dims", o.dims,
                 "lattice extents (1-3 integers, e.g. --dims 3 3 3)");
  app.add_option("--rho", o.rho, "nearest-neighbor spacing");
  app.add_option("--c", o.c, "position-momentum coupling strength");
  app.add_option("--file", o.file, "Hamiltonian matrix file (rows-cols text)");
  app.add_option("--k", o.k, "number of leading pairs (partial)");
  app.add_option("--method", o.method, "cg | gd");
  app.add_option("--tol", o.tol, "gradient sup-norm tolerance");
  app.add_option("--max-steps", o.max_steps,
                 "cost-call budget, probes included");
  app.add_option("--lr", o.learning_rate, "gd learning rate");
  app.add_option("--momentum", o.momentum, "gd momentum");
  app.add_option("--init", o.init,
                 "gamma_t | zero | random | warm:<dir> "
                 "(default: gamma_t for solve, random otherwise)");
  app.add_option("--warm-path", o.warm_path,
                 "factors directory to warm-start from");
  app.add_flag("--oracle", o.oracle,
               "also run exact diagonalization and report errors");
  app.add_option("--out-dir", o.out_dir, "output directory");
  app.add_option("--seed", o.seed, "seed for random starts");
  app.add_option("--rho-list", o.rho_list,
                 "sweep densities, warm-starting each from the previous");
  app.add_option("--config", o.config_path,
                 "JSON config; command-line flags override it");
  app.add_option("--dir", o.dir, "finished run directory (compare)");
  app.add_option("--mode", o.mode,
                 "gradcheck target: energy | gap | partial | all");

  try {
    app.parse(argc, argv);
    merge_config(app, o);
    return dispatch(o);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  } catch (const InvalidInput& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const NumericalFailure& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "failure: " << e.what() << "\n";
    return 2;
  }
}
