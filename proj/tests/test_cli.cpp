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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <json.hpp>
#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct RunResult {
  int rc;
  std::string out;
};

const std::string& cli() {
  static const std::string path = [] {
    const char* p = std::getenv("SYMPOPT_CLI");
    REQUIRE_MESSAGE(p != nullptr, "SYMPOPT_CLI must point at the binary");
    return std::string(p);
  }();
  return path;
}

fs::path scratch(const std::string& name) {
  fs::path p = fs::temp_directory_path() / ("sympopt_cli_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

RunResult run(const std::string& args, const fs::path& dir) {
  const fs::path log = dir / "stdout.log";
  const std::string cmd =
      cli() + " " + args + " > " + log.string() + " 2>&1";
  const int status = std::system(cmd.c_str());
  RunResult r;
  r.rc = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  std::ifstream in(log);
  std::stringstream ss;
  ss << in.rdbuf();
  r.out = ss.str();
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  REQUIRE(bool(in));
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json load_json(const fs::path& p) { return json::parse(slurp(p)); }

// trace rows minus the wall-clock column, which legitimately varies
std::vector<std::string> trace_without_elapsed(const fs::path& p) {
  std::ifstream in(p);
  REQUIRE(bool(in));
  std::vector<std::string> rows;
  std::string line;
  while (std::getline(in, line)) {
    const auto cut = line.rfind(',');
    rows.push_back(line[0] == '#' || line[0] == 's'
                       ? line
                       : line.substr(0, cut));
  }
  return rows;
}

}  // namespace

TEST_CASE("exit codes follow the 0/1/2 contract") {
  auto dir = scratch("codes");
  CHECK(run("--help", dir).rc == 0);
  CHECK(run("fandango", dir).rc == 1);
  CHECK(run("solve", dir).rc == 1);  // no problem source
  CHECK(run("solve --dims 2 --file nope.mat", dir).rc == 1);
  CHECK(run("solve --bogus-flag", dir).rc == 1);
  CHECK(run("gradcheck --dims 3 --rho 2", dir).rc == 1);  // d = 9 > 8
  CHECK(run("solve --dims 2 --rho 2 --tol -1", dir).rc == 1);
  // overlapping oscillators make H indefinite
  CHECK(run("solve --dims 8 --rho 0.9 --out-dir " + (dir / "x").string(),
            dir).rc == 2);
  fs::remove_all(dir);
}

TEST_CASE("solve writes the full artifact set and the right answer") {
  auto dir = scratch("solve");
  const auto out = dir / "run";
  auto r = run("solve --dims 1 --rho 10 --oracle --out-dir " + out.string(),
               dir);
  CHECK(r.rc == 0);
  CHECK(r.out.find("E0_sopt = 1.5\n") != std::string::npos);

  CHECK(fs::exists(out / "trace.csv"));
  CHECK(fs::exists(out / "gamma_sopt.mat"));
  CHECK(fs::exists(out / "factors" / "manifest.json"));
  CHECK(fs::exists(out / "factors" / "m1.mat"));

  json record = load_json(out / "result.json");
  CHECK(record["task"] == "solve");
  CHECK(record["problem"]["d"] == 3);
  CHECK(record["e0_sopt"] == 1.5);
  CHECK(record["oracle"]["e0_sd"] == 1.5);
  CHECK(record["oracle"]["errors"]["e0_abs_error"] == 0.0);
  CHECK(record["oracle"]["reference"] == "symplectic_diagonalization");
  CHECK(record["status"] == "converged");

  auto rows = trace_without_elapsed(out / "trace.csv");
  REQUIRE(rows.size() >= 3);
  CHECK(rows[0] == "# init: gamma_t");
  CHECK(rows[1] == "step,cost,grad_norm,elapsed_s");
  fs::remove_all(dir);
}

TEST_CASE("identical configs reproduce identical artifacts") {
  auto dir = scratch("repro");
  const std::string args =
      "gap --dims 4 --rho 1.9 --tol 1e-8 --seed 3 --oracle --out-dir ";
  CHECK(run(args + (dir / "a").string(), dir).rc == 0);
  CHECK(run(args + (dir / "b").string(), dir).rc == 0);

  CHECK(trace_without_elapsed(dir / "a" / "trace.csv") ==
        trace_without_elapsed(dir / "b" / "trace.csv"));
  for (const char* f : {"m1.mat", "m2.mat", "m3.mat", "manifest.json"})
    CHECK(slurp(dir / "a" / "factors" / f) ==
          slurp(dir / "b" / "factors" / f));

  json ja = load_json(dir / "a" / "result.json");
  json jb = load_json(dir / "b" / "result.json");
  ja.erase("wall_time_s");
  jb.erase("wall_time_s");
  CHECK(ja.dump() == jb.dump());
  fs::remove_all(dir);
}

TEST_CASE("compare replays a run from its artifacts") {
  auto dir = scratch("compare");
  const auto out = dir / "run";
  CHECK(run("solve --dims 2 --rho 2.5 --tol 1e-7 --oracle --out-dir " +
                out.string(),
            dir).rc == 0);
  auto ok = run("compare --dir " + out.string(), dir);
  CHECK(ok.rc == 0);
  CHECK(ok.out.find("compare: ok") != std::string::npos);

  // forge the record: compare must notice the numbers no longer match
  json record = load_json(out / "result.json");
  record["cost"] = record["cost"].get<double>() + 1e-3;
  std::ofstream(out / "result.json") << record.dump(2);
  auto bad = run("compare --dir " + out.string(), dir);
  CHECK(bad.rc == 2);
  CHECK(bad.out.find("MISMATCH") != std::string::npos);

  CHECK(run("compare --dir " + (dir / "absent").string(), dir).rc == 1);
  fs::remove_all(dir);
}

TEST_CASE("partial reports per-pair estimates against the oracle") {
  auto dir = scratch("partial");
  const auto out = dir / "run";
  auto r = run(
      "partial --dims 2 --rho 2.5 --k 2 --tol 1e-8 --max-steps 4000 "
      "--oracle --out-dir " +
          out.string(),
      dir);
  CHECK(r.rc == 0);
  json record = load_json(out / "result.json");
  REQUIRE(record["partial_sums"].size() == 2);
  REQUIRE(record["eps_estimates"].size() == 2);
  const double err =
      record["oracle"]["errors"]["max_eps_abs_error"].get<double>();
  CHECK(err <= 1e-6);
  fs::remove_all(dir);
}

TEST_CASE("a config file supplies defaults and flags override it") {
  auto dir = scratch("config");
  std::ofstream(dir / "cfg.json")
      << R"({"task":"diagonalize","dims":[2],"rho":2.5,"out_dir":")"
      << (dir / "a").string() << R"("})";
  CHECK(run("--config " + (dir / "cfg.json").string(), dir).rc == 0);
  json a = load_json(dir / "a" / "result.json");
  CHECK(a["problem"]["rho"] == 2.5);

  CHECK(run("--config " + (dir / "cfg.json").string() + " --rho 3.0" +
                " --out-dir " + (dir / "b").string(),
            dir).rc == 0);
  json b = load_json(dir / "b" / "result.json");
  CHECK(b["problem"]["rho"] == 3.0);
  CHECK(a["e0_sd"] != b["e0_sd"]);

  std::ofstream(dir / "typo.json") << R"({"task":"solve","dens":[2]})";
  CHECK(run("--config " + (dir / "typo.json").string(), dir).rc == 1);
  fs::remove_all(dir);
}

TEST_CASE("warm starts and rho sweeps reuse earlier optima") {
  auto dir = scratch("warm");
  const std::string base =
      "solve --dims 2 2 --tol 1e-7 --out-dir ";
  CHECK(run(base + (dir / "cold").string() + " --rho 2.5", dir).rc == 0);
  CHECK(run(base + (dir / "warm").string() + " --rho 2.4 --warm-path " +
                (dir / "cold" / "factors").string(),
            dir).rc == 0);
  json cold = load_json(dir / "cold" / "result.json");
  json warm = load_json(dir / "warm" / "result.json");
  CHECK(warm["init"].get<std::string>().rfind("warm:", 0) == 0);
  CHECK(warm["cost_calls"].get<long>() < cold["cost_calls"].get<long>());

  auto sweep = run("gap --dims 4 --tol 1e-8 --rho-list 2.5 2.4 --out-dir " +
                       (dir / "sweep").string(),
                   dir);
  CHECK(sweep.rc == 0);
  json first = load_json(dir / "sweep" / "rho_2.5" / "result.json");
  json second = load_json(dir / "sweep" / "rho_2.4" / "result.json");
  CHECK(first["init"] == "random");
  CHECK(second["init"].get<std::string>().rfind("warm:", 0) == 0);
  CHECK(second["problem"]["rho"] == 2.4);
  fs::remove_all(dir);
}

TEST_CASE("gradcheck passes on a healthy instance") {
  auto dir = scratch("gradcheck");
  auto r = run("gradcheck --dims 2 --rho 2.2 --c 0.1 --seed 4", dir);
  CHECK(r.rc == 0);
  CHECK(r.out.find("gradcheck: ok") != std::string::npos);
  CHECK(r.out.find("gap/m1") != std::string::npos);
  fs::remove_all(dir);
}
