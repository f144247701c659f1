#include <chrono>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "experiments.hpp"
#include "idsim/errors.hpp"

namespace {

constexpr int kPass = 0;
constexpr int kIdentityFailed = 1;
constexpr int kBadInput = 2;

std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return os.str();
}

void write_csv(const std::string& path, const idsim::cli::CsvTable& table) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  for (std::size_t i = 0; i < table.header.size(); ++i) out << (i ? "," : "") << table.header[i];
  out << '\n' << std::setprecision(17);
  for (const auto& row : table.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << row[i];
    out << '\n';
  }
}

int run(const std::string& config_path, std::optional<std::uint64_t> seed,
        std::optional<std::uint64_t> reps, std::optional<std::string> out_path) {
  nlohmann::json config;
  try {
    std::ifstream in(config_path);
    if (!in) {
      std::cerr << "error: cannot open " << config_path << '\n';
      return kBadInput;
    }
    config = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error: " << config_path << ": " << e.what() << '\n';
    return kBadInput;
  }
  if (!config.is_object()) {
    std::cerr << "error: config must be a JSON object\n";
    return kBadInput;
  }
  if (seed) config["seed"] = *seed;
  if (reps) config["reps"] = *reps;
  if (out_path) config["output"] = *out_path;

  idsim::cli::RunResult result;
  try {
    result = idsim::cli::run_experiment(config);
  } catch (const idsim::ModelError& e) {
    std::cerr << "model error: " << e.what() << '\n';
    return kBadInput;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kBadInput;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kBadInput;
  }

  const auto report = idsim::cli::make_report(config, result, utc_timestamp());
  const auto text = report.dump(2);
  if (config.contains("output") && config["output"].is_string()) {
    std::ofstream out(config["output"].get<std::string>());
    if (!out) {
      std::cerr << "error: cannot write " << config["output"].get<std::string>() << '\n';
      return kBadInput;
    }
    out << text << '\n';
  } else {
    std::cout << text << '\n';
  }
  if (config.contains("csv") && config["csv"].is_string() && !result.csv.header.empty())
    write_csv(config["csv"].get<std::string>(), result.csv);

  std::cerr << (result.pass ? "PASS" : "FAIL") << '\n';
  return result.pass ? kPass : kIdentityFailed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Monte Carlo checks for infinitely divisible processes"};
  app.set_version_flag("--version", idsim::cli::version());
  app.require_subcommand(1);

  auto* run_cmd = app.add_subcommand("run", "run an experiment described by a JSON config");
  std::string config_path;
  std::optional<std::uint64_t> seed, reps;
  std::optional<std::string> out_path;
  run_cmd->add_option("config", config_path, "experiment config (JSON)")->required();
  run_cmd->add_option("--seed", seed, "override the config seed");
  run_cmd->add_option("--reps", reps, "override the replication count")->check(CLI::PositiveNumber);
  run_cmd->add_option("--out", out_path, "write the JSON report here instead of stdout");

  app.add_subcommand("list", "list experiments and their model types");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kBadInput;
  }

  if (app.got_subcommand("list")) {
    std::cout << idsim::cli::list_experiments();
    return kPass;
  }
  return run(config_path, seed, reps, out_path);
}
