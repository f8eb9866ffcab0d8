// ecostream command-line runner.
//
//   ecostream run <scenario|path> [--seed S] [--reps R] [--out DIR] [--mode expected|mc]
//   ecostream list
//   ecostream generate --users N --seed S --out FILE
//
// Exit codes: 0 success, 1 configuration or usage error, 2 runtime error.
// ECOSTREAM_OUTPUT_DIR sets the root for run outputs (<root>/<scenario name>);
// --out overrides it. ECOSTREAM_SCENARIO_DIR overrides the bundled scenario
// directory.

#include <cstdlib>
#include <exception>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "ecostream/io.hpp"
#include "ecostream/population.hpp"
#include "ecostream/scenario.hpp"

#ifndef ECOSTREAM_DEFAULT_SCENARIO_DIR
#define ECOSTREAM_DEFAULT_SCENARIO_DIR "scenarios"
#endif

namespace {

constexpr int kOk = 0;
constexpr int kConfigError = 1;
constexpr int kRuntimeError = 2;

std::filesystem::path scenario_dir() {
  if (const char* env = std::getenv("ECOSTREAM_SCENARIO_DIR"); env && *env) return env;
  return ECOSTREAM_DEFAULT_SCENARIO_DIR;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ecostream: gamified incentive simulation for energy-aware streaming"};
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "Run a bundled scenario or a scenario file");
  std::string target;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> reps;
  std::optional<std::string> out_dir;
  std::optional<std::string> mode;
  run->add_option("scenario", target, "Scenario name or path to a YAML file")->required();
  run->add_option("--seed", seed, "Base seed");
  run->add_option("--reps", reps, "Number of replications");
  run->add_option("--out", out_dir, "Output directory");
  run->add_option("--mode", mode, "Evaluation mode")
      ->check(CLI::IsMember({"expected", "mc"}));

  auto* list = app.add_subcommand("list", "List bundled scenarios");

  auto* gen = app.add_subcommand("generate", "Write a synthetic population CSV");
  std::size_t users = 1000;
  std::uint64_t gen_seed = 1;
  std::string gen_out;
  gen->add_option("--users", users, "Number of users")->check(CLI::PositiveNumber);
  gen->add_option("--seed", gen_seed, "Seed");
  gen->add_option("--out", gen_out, "Output CSV path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfigError;
  }

  try {
    if (*list) {
      for (const auto& e : ecostream::list_scenarios(scenario_dir())) {
        std::cout << e.name << "\t" << e.description << "\n";
      }
      return kOk;
    }

    if (*gen) {
      ecostream::ScenarioConfig cfg;
      cfg.population.n_users = users;
      const auto pop = ecostream::replication_population(cfg, gen_seed);
      ecostream::write_population(gen_out, pop);
      std::cerr << "wrote " << gen_out << " (" << pop.size() << " users)\n";
      return kOk;
    }

    auto cfg = ecostream::load_scenario(ecostream::resolve_scenario(target, scenario_dir()));
    if (seed) cfg.seed = *seed;
    if (reps) cfg.replications = *reps;
    if (mode) {
      cfg.mode = *mode == "mc" ? ecostream::EvaluationMode::monte_carlo(cfg.mc_reps)
                               : ecostream::EvaluationMode::expected();
    }
    if (out_dir) {
      cfg.output_dir = *out_dir;
    } else if (const char* env = std::getenv("ECOSTREAM_OUTPUT_DIR"); env && *env) {
      cfg.output_dir = std::filesystem::path(env) / cfg.name;
    }
    cfg.validate();
    const auto res = ecostream::run_scenario(cfg);
    std::cerr << cfg.name << ": " << res.rows.size() << " rows -> " << cfg.output_dir.string()
              << "\n";
    return kOk;
  } catch (const ecostream::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kRuntimeError;
  }
}
