#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <sys/wait.h>

#include "doctest.h"
#include "experiments.hpp"
#include "idsim/errors.hpp"
#include "json.hpp"
#include "oracles.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Outcome {
  int code = -1;
  std::string out;
};

Outcome run(const std::string& args) {
  const std::string cmd = std::string(IDSIM_BINARY) + " " + args + " 2>/dev/null";
  Outcome r;
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  char buf[4096];
  std::size_t n;
  while ((n = fread(buf, 1, sizeof buf, pipe)) > 0) r.out.append(buf, n);
  const int status = pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string config(const std::string& name) { return std::string(IDSIM_CLI_CONFIGS) + "/" + name; }

json load(const std::string& path) {
  std::ifstream in(path);
  return json::parse(in);
}

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / "idsim_cli_test";
  fs::create_directories(dir);
  return dir / name;
}

}  // namespace

TEST_CASE("exit codes") {
  const auto pass = run("run " + config("poisson_shift.json"));
  CHECK(pass.code == 0);
  const auto report = json::parse(pass.out);
  CHECK(report.at("pass").get<bool>());
  // both arms near the closed form
  const double expected = oracle::poisson_shift_value(30.0);
  const auto& r = report.at("result");
  CHECK(std::abs(r.at("lhs_mean").get<double>() - expected) < 4.0 * r.at("lhs_se").get<double>());
  CHECK(std::abs(r.at("rhs_mean").get<double>() - expected) < 4.0 * r.at("rhs_se").get<double>());

  CHECK(run("run " + config("poisson_shift_scaled.json")).code == 1);
  CHECK(run("run " + config("malformed.json")).code == 2);
  CHECK(run("run " + config("unknown_experiment.json")).code == 2);
  CHECK(run("run " + config("bad_model.json")).code == 2);
  CHECK(run("run " + config("does_not_exist.json")).code == 2);
  CHECK(run("run " + config("poisson_shift.json") + " --reps 0").code == 2);
  CHECK(run("frobnicate").code == 2);
}

TEST_CASE("list is stable") {
  const auto a = run("list"), b = run("list");
  CHECK(a.code == 0);
  CHECK(a.out == b.out);
  CHECK(a.out.find("verify_dynkin") != std::string::npos);
  CHECK(a.out.find("small_time_limit") != std::string::npos);
  std::size_t lines = 0;
  for (char c : a.out) lines += (c == '\n');
  CHECK(lines == idsim::cli::experiments().size());
}

TEST_CASE("same seed, same report") {
  const auto out = scratch("report.json");
  const std::string args = "run " + config("poisson_shift.json") + " --reps 2000 --out " + out.string();
  REQUIRE(run(args).code == 0);
  auto first = load(out.string());
  REQUIRE(run(args).code == 0);
  auto second = load(out.string());
  CHECK(first.contains("timestamp"));
  first.erase("timestamp");
  second.erase("timestamp");
  CHECK(first == second);
  CHECK(first.at("seed").get<std::uint64_t>() == 20240611);
  CHECK(first.at("version").get<std::string>() == idsim::cli::version());

  const auto other = run("run " + config("poisson_shift.json") + " --reps 2000 --seed 5");
  REQUIRE(other.code == 0);
  auto third = json::parse(other.out);
  CHECK(third.at("seed").get<std::uint64_t>() == 5);
  CHECK(third.at("result") != first.at("result"));
}

TEST_CASE("single path generation writes a csv") {
  auto cfg = load(config("generate_levy.json"));
  const auto csv = scratch("path.csv");
  fs::remove(csv);
  cfg["csv"] = csv.string();
  const auto path = scratch("generate.json");
  std::ofstream(path) << cfg.dump();
  const auto r = run("run " + path.string());
  REQUIRE(r.code == 0);
  const auto report = json::parse(r.out);
  CHECK(report.at("result").at("paths").get<int>() == 1);

  std::ifstream in(csv);
  REQUIRE(in.good());
  std::string line;
  std::getline(in, line);
  CHECK(line == "t,mean,se");
  std::size_t rows = 0;
  while (std::getline(in, line))
    if (!line.empty()) ++rows;
  CHECK(rows == 5);
  // t = 0 carries no jump and no drift
  CHECK(report.at("result").at("grid").at(0).at("mean").get<double>() == 0.0);
}

TEST_CASE("in-process runs") {
  CHECK_THROWS_AS(idsim::cli::run_experiment(json::array()), idsim::ModelError);
  CHECK_THROWS_AS(idsim::cli::run_experiment(json{{"experiment", "verify_iso2"}, {"reps", 0}}),
                  idsim::ModelError);
  auto cfg = load(config("poisson_shift.json"));
  cfg["reps"] = 500;
  const auto a = idsim::cli::run_experiment(cfg);
  const auto b = idsim::cli::run_experiment(cfg);
  CHECK(a.report == b.report);
  const auto doc = idsim::cli::make_report(cfg, a, "t");
  for (const char* key : {"version", "config", "seed", "pass", "result", "timestamp"})
    CHECK(doc.contains(key));
}
