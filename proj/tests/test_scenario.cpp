#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include <gtest/gtest.h>

#include "ecostream/scenario.hpp"

using namespace ecostream;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  auto dir = fs::temp_directory_path() / ("ecostream_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::ostringstream os;
  os << is.rdbuf();
  return os.str();
}

const char* kSmallSweep = R"(
name: small_sweep
population:
  n_users: 200
calibration:
  target: 453.6
policy:
  offers: [[1, 0.5], [3, 2]]
game:
  k_values: [0, 20]
  m_values: [0, 5]
  h_values: [1000]
  budgets: {start: 0, stop: 600, step: 200}
run:
  replications: 3
  seed: 11
)";

const char* kSmallStackelberg = R"(
name: small_stackelberg
kind: stackelberg
population:
  n_users: 150
calibration:
  target: 340.2
game:
  k_values: [0, 10, 20]
  m_values: [0, 10]
  mu_values: [1, 3]
  sigma_values: [0.5, 2]
  h_values: [1, 1000]
  budgets: [1, 100]
run:
  replications: 2
  seed: 3
)";

int run_cli(const std::string& args) {
  const std::string cmd = std::string(ECOSTREAM_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WEXITSTATUS(status);
}

}  // namespace

TEST(ScenarioParse, DefaultsAndOverrides) {
  const auto cfg = parse_scenario_string(kSmallSweep);
  EXPECT_EQ(cfg.name, "small_sweep");
  EXPECT_EQ(cfg.kind, ScenarioKind::Sweep);
  EXPECT_EQ(cfg.population.n_users, 200u);
  EXPECT_EQ(cfg.population.high_set, PopulationConfig{}.high_set);
  EXPECT_EQ(cfg.budgets, (std::vector<double>{0, 200, 400, 600}));
  EXPECT_EQ(cfg.offers.size(), 2u);
  EXPECT_EQ(cfg.replications, 3u);
  EXPECT_EQ(cfg.output_dir, fs::path("out") / "small_sweep");

  const auto st = parse_scenario_string("kind: stackelberg");
  EXPECT_EQ(st.k_values, StrategyGrid{}.k_values);
  EXPECT_EQ(st.sigma_values, StrategyGrid{}.sigma_values);
}

TEST(ScenarioParse, Errors) {
  EXPECT_THROW(parse_scenario_string("game: {budgets: []}"), ConfigError);
  EXPECT_THROW(parse_scenario_string("game: {k_values: []}"), ConfigError);
  EXPECT_THROW(parse_scenario_string("run: {replications: 0}"), ConfigError);
  EXPECT_THROW(parse_scenario_string("bogus: 1"), ConfigError);
  EXPECT_THROW(parse_scenario_string("policy: {family: cauchy}"), ConfigError);
  EXPECT_THROW(parse_scenario_string("policy: {offers: [[1, 2, 3]]}"), ConfigError);
  EXPECT_THROW(parse_scenario_string("game: {budgets: {start: 5, stop: 1, step: 1}}"),
               ConfigError);
  EXPECT_THROW(parse_scenario_string("game: {k_values: [600], m_values: [500]}"), ConfigError);
  EXPECT_THROW(parse_scenario_string("population: {n_users: [1, 2]}"), ConfigError);
  EXPECT_THROW(parse_scenario_string("{unclosed"), ConfigError);
}

TEST(Catalog, BundledScenarios) {
  const auto entries = list_scenarios(ECOSTREAM_SCENARIO_DIR);
  EXPECT_GE(entries.size(), 11u);
  std::set<std::string> names;
  for (const auto& e : entries) {
    names.insert(e.name);
    EXPECT_TRUE(fs::is_regular_file(e.path));
    EXPECT_EQ(e.path.stem().string(), e.name);
    EXPECT_FALSE(e.description.empty());
  }
  for (const char* n : {"fig1_budget_sweep", "fig2_budget_sweep_h1", "fig3_budget_sweep_mild",
                        "fig4_budget_sweep_high", "fig5_lognormal_small", "fig6_lognormal_mild",
                        "fig7_stackelberg_b1", "fig8_stackelberg_b100",
                        "fig9_stackelberg_b1000", "fig10_uhd_to_fhd",
                        "table1_traffic_reduction"}) {
    EXPECT_TRUE(names.count(n)) << n;
  }
  EXPECT_EQ(resolve_scenario("fig1_budget_sweep", ECOSTREAM_SCENARIO_DIR).filename(),
            "fig1_budget_sweep.yaml");
  EXPECT_THROW(resolve_scenario("no_such_scenario", ECOSTREAM_SCENARIO_DIR), ConfigError);
}

TEST(RunScenario, RowCountAndOrder) {
  const auto cfg = parse_scenario_string(kSmallSweep);
  const auto res = execute_scenario(cfg);
  ASSERT_EQ(res.rows.size(), 2u * 1u * 2u * 2u * 4u * 3u);
  for (std::size_t i = 0; i < res.rows.size(); ++i) {
    EXPECT_EQ(res.rows[i].seed, cfg.seed + i % 3);
  }
  // Budget is the innermost grid axis.
  EXPECT_EQ(res.rows[0].budget, 0.0);
  EXPECT_EQ(res.rows[3].budget, 200.0);
  for (const auto& r : res.replications) EXPECT_NEAR(r.sum_r_min, 453.6, 1.0);
}

TEST(RunScenario, ByteIdenticalReruns) {
  auto cfg = parse_scenario_string(kSmallSweep);
  const auto a = scratch("rerun_a"), b = scratch("rerun_b");
  cfg.output_dir = a;
  run_scenario(cfg);
  cfg.output_dir = b;
  cfg.workers = 3;
  run_scenario(cfg);
  for (const char* f : {"population.csv", "population.json", "sweep.csv", "summary.json"}) {
    EXPECT_EQ(slurp(a / f), slurp(b / f)) << f;
  }
  const auto csv = slurp(a / "sweep.csv");
  EXPECT_EQ(csv.find('\r'), std::string::npos);
  EXPECT_EQ(csv.substr(0, csv.find('\n')),
            "k,m,mu,sigma,h,budget,seed,spend,traffic_kbps,traffic_pct,energy_w,co2_g,"
            "switchers_expected,switchers_realized");
}

// Rebuilds summary.json's argmax from sweep.csv alone.
TEST(RunScenario, ArgmaxRecomputableFromCsv) {
  auto cfg = parse_scenario_string(kSmallStackelberg);
  const auto dir = scratch("argmax");
  cfg.output_dir = dir;
  run_scenario(cfg);

  std::ifstream is(dir / "sweep.csv");
  const auto table = read_csv(is);
  ASSERT_GT(table.size(), 1u);
  const auto& header = table[0];
  std::map<std::string, std::size_t> col;
  for (std::size_t i = 0; i < header.size(); ++i) col[header[i]] = i;
  const std::size_t points = 3 * 2 * 2 * 2;
  EXPECT_EQ(table.size() - 1, 2u * 2u * points * cfg.replications);

  std::vector<SweepRow> rows;
  for (std::size_t i = 1; i < table.size(); ++i) {
    const auto& t = table[i];
    SweepRow r;
    r.k = std::stoul(t[col["k"]]);
    r.m = std::stoul(t[col["m"]]);
    r.mu = std::stod(t[col["mu"]]);
    r.sigma = std::stod(t[col["sigma"]]);
    r.h = std::stod(t[col["h"]]);
    r.budget = std::stod(t[col["budget"]]);
    r.seed = std::stoull(t[col["seed"]]);
    r.metrics.expected_spend = std::stod(t[col["spend"]]);
    r.metrics.expected_energy_reduction = std::stod(t[col["energy_w"]]);
    rows.push_back(r);
  }

  std::ifstream js(dir / "summary.json");
  const auto summary = nlohmann::json::parse(js);

  // Per-replication equilibria: argmax within each (h, budget, seed).
  std::map<std::tuple<double, double, std::uint64_t>, const SweepRow*> best;
  for (const auto& r : rows) {
    auto& b = best[{r.h, r.budget, r.seed}];
    const auto key = [](const SweepRow& x) {
      return std::make_tuple(-x.metrics.expected_energy_reduction, x.metrics.expected_spend,
                             x.k, x.m, x.mu, x.sigma);
    };
    if (!b || key(r) < key(*b)) b = &r;
  }
  ASSERT_EQ(summary["equilibria"].size(), best.size());
  for (const auto& e : summary["equilibria"]) {
    const auto* b = best.at({e["h"].get<double>(), e["budget"].get<double>(),
                             e["seed"].get<std::uint64_t>()});
    EXPECT_EQ(e["k"].get<std::size_t>(), b->k);
    EXPECT_EQ(e["m"].get<std::size_t>(), b->m);
    EXPECT_EQ(e["mu"].get<double>(), b->mu);
    EXPECT_EQ(e["sigma"].get<double>(), b->sigma);
    EXPECT_EQ(e["energy_w"].get<double>(), b->metrics.expected_energy_reduction);
  }

  // Replication-mean argmax per (h, budget).
  const auto pts = summarize_points(rows);
  const auto idx = argmax_by_h_budget(pts);
  ASSERT_EQ(summary["argmax"].size(), idx.size());
  for (std::size_t i = 0; i < idx.size(); ++i) {
    const auto& a = summary["argmax"][i];
    EXPECT_EQ(a["k"].get<std::size_t>(), pts[idx[i]].key.k);
    EXPECT_EQ(a["m"].get<std::size_t>(), pts[idx[i]].key.m);
    EXPECT_EQ(a["mu"].get<double>(), pts[idx[i]].key.mu);
    EXPECT_EQ(a["sigma"].get<double>(), pts[idx[i]].key.sigma);
    EXPECT_EQ(a["energy_w"]["mean"].get<double>(), pts[idx[i]].energy_w.mean);
  }

  const auto bitrates = slurp(dir / "bitrates.csv");
  EXPECT_EQ(std::count(bitrates.begin(), bitrates.end(), '\n'), 1 + 2 * 2 * 150);
  const auto meta = nlohmann::json::parse(slurp(dir / "meta.json"));
  EXPECT_EQ(meta["rng"].get<std::string>(), kRngAlgorithm);
  EXPECT_EQ(meta["replications"].size(), 2u);
  EXPECT_EQ(meta["config"]["name"].get<std::string>(), "small_stackelberg");
}

TEST(Cli, ExitCodesAndOutputs) {
  const auto dir = scratch("cli");
  const auto scen = dir / "s.yaml";
  {
    std::ofstream os(scen);
    os << kSmallSweep;
  }
  EXPECT_EQ(run_cli("list"), 0);
  EXPECT_EQ(run_cli("run " + scen.string() + " --reps 1 --out " + (dir / "o").string()), 0);
  EXPECT_TRUE(fs::is_regular_file(dir / "o" / "sweep.csv"));
  EXPECT_TRUE(fs::is_regular_file(dir / "o" / "summary.json"));
  EXPECT_TRUE(fs::is_regular_file(dir / "o" / "meta.json"));
  EXPECT_TRUE(fs::is_regular_file(dir / "o" / "population.csv"));

  {
    std::ofstream os(dir / "bad.yaml");
    os << "game:\n  budgets: []\n";
  }
  EXPECT_EQ(run_cli("run " + (dir / "bad.yaml").string() + " --out " + (dir / "bad").string()),
            1);
  EXPECT_EQ(run_cli("run no_such_scenario"), 1);
  EXPECT_EQ(run_cli("frobnicate"), 1);
  EXPECT_EQ(run_cli("run " + scen.string() + " --mode fast"), 1);

  // Output directory that cannot be created: runtime error.
  {
    std::ofstream os(dir / "blocker");
    os << "x";
  }
  EXPECT_EQ(run_cli("run " + scen.string() + " --reps 1 --out " + (dir / "blocker" / "o").string()),
            2);

  EXPECT_EQ(run_cli("generate --users 25 --seed 4 --out " + (dir / "pop.csv").string()), 0);
  const auto pop = slurp(dir / "pop.csv");
  EXPECT_EQ(std::count(pop.begin(), pop.end(), '\n'), 26);
  EXPECT_EQ(pop.substr(0, pop.find('\n')), "id,x_h,x_l,gamma,delta,r_min,s,du");
  EXPECT_TRUE(fs::is_regular_file(dir / "pop.json"));
}

TEST(Cli, OutputDirectoryFromEnvironment) {
  const auto dir = scratch("cli_env");
  const auto scen = dir / "s.yaml";
  {
    std::ofstream os(scen);
    os << kSmallSweep;
  }
  const std::string cmd = "ECOSTREAM_OUTPUT_DIR=" + (dir / "root").string() + " " +
                          ECOSTREAM_CLI_PATH + " run " + scen.string() +
                          " --reps 1 >/dev/null 2>&1";
  ASSERT_EQ(WEXITSTATUS(std::system(cmd.c_str())), 0);
  EXPECT_TRUE(fs::is_regular_file(dir / "root" / "small_sweep" / "sweep.csv"));
}
