#pragma once

// Scenario files, replication driver and run artifacts.
//
// A scenario is a YAML document. Every key is optional; omitted keys keep the
// built-in defaults, so a file only states how it differs from the default
// experiment. See README.md for the schema.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <initializer_list>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include <nlohmann/json.hpp>
#include <yaml-cpp/yaml.h>

#include "ecostream/error.hpp"
#include "ecostream/game.hpp"
#include "ecostream/io.hpp"
#include "ecostream/parallel.hpp"
#include "ecostream/population.hpp"
#include "ecostream/rng.hpp"
#include "ecostream/version.hpp"

namespace ecostream {

enum class ScenarioKind { Sweep, Stackelberg };

struct OfferPair {
  double mu = 1.0;
  double sigma = 0.5;
};

// Lambda is fitted per replication so that the population's total minimum
// incentive hits `target`. The fit uses `high_set` / `low_set` (the default
// bitrate sets unless overridden) with the replication's seed.
struct Calibration {
  bool enabled = true;
  double target = 2268.0;  // MU
  double tolerance = 1e-6;
  std::vector<double> high_set = PopulationConfig{}.high_set;
  std::vector<double> low_set = PopulationConfig{}.low_set;
};

struct ScenarioConfig {
  std::string name = "unnamed";
  std::string description;
  ScenarioKind kind = ScenarioKind::Sweep;

  PopulationConfig population;
  Calibration calibration;

  OfferFamily family = OfferFamily::Normal;
  Targeting targeting = Targeting::Random;
  LogNormalForm lognormal_form = LogNormalForm::MomentMatched;
  std::vector<OfferPair> offers{{1.0, 0.5}};  // sweep kind

  std::vector<std::size_t> k_values{0};
  std::vector<std::size_t> m_values{0};
  std::vector<double> mu_values;     // stackelberg kind
  std::vector<double> sigma_values;  // stackelberg kind
  std::vector<double> h_values{1000.0};
  std::vector<double> budgets{3000.0};

  EvaluationMode mode = EvaluationMode::expected();
  std::size_t mc_reps = 100;
  std::size_t replications = 20;
  std::uint64_t seed = 1;
  std::filesystem::path output_dir;
  PipelineOptions pipeline;
  std::size_t workers = 1;

  void validate() const {
    population.validate();
    if (replications < 1) throw ConfigError("scenario: replications must be >= 1");
    if (k_values.empty() || m_values.empty() || h_values.empty() || budgets.empty()) {
      throw ConfigError("scenario: k_values, m_values, h_values and budgets must be non-empty");
    }
    for (double b : budgets) {
      if (!(b >= 0.0)) throw ConfigError("scenario: budgets must be >= 0");
    }
    for (double h : h_values) {
      if (!(h >= 0.0)) throw ConfigError("scenario: h_values must be >= 0");
    }
    if (mode.kind == EvaluationMode::Kind::MonteCarlo && mode.reps < 1) {
      throw ConfigError("scenario: mc_reps must be >= 1");
    }
    if (pipeline.max_rounds < 1) throw ConfigError("scenario: max_rounds must be >= 1");
    if (kind == ScenarioKind::Sweep) {
      if (offers.empty()) throw ConfigError("scenario: policy.offers must be non-empty");
      for (const auto& o : offers) {
        OfferPolicy{family, o.mu, o.sigma, targeting, lognormal_form}.validate();
      }
      for (auto k : k_values) {
        for (auto m : m_values) {
          if (k + m > population.n_users) {
            throw ConfigError("scenario: k + m exceeds n_users");
          }
        }
      }
    } else {
      if (mu_values.empty() || sigma_values.empty()) {
        throw ConfigError("scenario: mu_values and sigma_values must be non-empty");
      }
      for (double mu : mu_values) {
        for (double s : sigma_values) {
          OfferPolicy{family, mu, s, targeting, lognormal_form}.validate();
        }
      }
    }
    if (calibration.enabled) {
      if (!(calibration.target >= 0.0) || !(calibration.tolerance > 0.0)) {
        throw ConfigError("scenario: calibration needs target >= 0 and tolerance > 0");
      }
    }
  }
};

// --- YAML -------------------------------------------------------------------

namespace detail {

inline void check_keys(const YAML::Node& node, std::string_view section,
                       std::initializer_list<std::string_view> allowed) {
  if (!node) return;
  if (!node.IsMap()) throw ConfigError("scenario: '" + std::string(section) + "' must be a map");
  for (const auto& kv : node) {
    const auto key = kv.first.as<std::string>();
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      throw ConfigError("scenario: unknown key '" + key + "' in '" + std::string(section) + "'");
    }
  }
}

template <typename T>
void read(const YAML::Node& node, const char* key, T& out) {
  if (node && node[key]) out = node[key].template as<T>();
}

inline void read_interval(const YAML::Node& node, const char* key, Interval& out) {
  if (!node || !node[key]) return;
  const auto v = node[key].as<std::vector<double>>();
  if (v.size() != 2) throw ConfigError(std::string("scenario: '") + key + "' needs [lo, hi]");
  out = {v[0], v[1]};
}

// A list, or {start, stop, step} with stop included.
inline std::vector<double> read_range(const YAML::Node& node, const char* key) {
  const auto n = node[key];
  if (n.IsSequence()) return n.as<std::vector<double>>();
  if (!n.IsMap()) throw ConfigError(std::string("scenario: '") + key + "' must be a list or range");
  check_keys(n, key, {"start", "stop", "step"});
  const double start = n["start"].as<double>();
  const double stop = n["stop"].as<double>();
  const double step = n["step"].as<double>();
  if (!(step > 0.0) || stop < start) {
    throw ConfigError(std::string("scenario: '") + key + "' range needs step > 0, stop >= start");
  }
  std::vector<double> out;
  for (std::size_t i = 0;; ++i) {
    const double v = start + step * static_cast<double>(i);
    if (v > stop + 1e-9 * step) break;
    out.push_back(v);
  }
  return out;
}

template <typename Enum>
Enum read_enum(const YAML::Node& node, const char* key, Enum fallback,
               std::initializer_list<std::pair<std::string_view, Enum>> names) {
  if (!node || !node[key]) return fallback;
  const auto s = node[key].as<std::string>();
  for (const auto& [name, value] : names) {
    if (s == name) return value;
  }
  throw ConfigError(std::string("scenario: invalid value '") + s + "' for '" + key + "'");
}

}  // namespace detail

inline ScenarioConfig parse_scenario(const YAML::Node& root) {
  using namespace detail;
  ScenarioConfig cfg;
  try {
    if (!root || root.IsNull()) return cfg;
    check_keys(root, "scenario",
               {"name", "description", "kind", "population", "calibration", "policy", "game",
                "run"});
    read(root, "name", cfg.name);
    read(root, "description", cfg.description);
    cfg.kind = read_enum(root, "kind", cfg.kind,
                         {{"sweep", ScenarioKind::Sweep},
                          {"stackelberg", ScenarioKind::Stackelberg}});

    if (const auto pop = root["population"]) {
      check_keys(pop, "population",
                 {"n_users", "high_set", "low_set", "gamma_range", "delta_range", "lambda_mu",
                  "energy_price", "model"});
      auto& p = cfg.population;
      read(pop, "n_users", p.n_users);
      read(pop, "high_set", p.high_set);
      read(pop, "low_set", p.low_set);
      read_interval(pop, "gamma_range", p.gamma_range);
      read_interval(pop, "delta_range", p.delta_range);
      read(pop, "lambda_mu", p.lambda_mu);
      read(pop, "energy_price", p.energy_price);
      if (const auto model = pop["model"]) {
        check_keys(model, "population.model", {"x_min", "x_max", "p0", "alpha", "eta"});
        read(model, "x_min", p.consts.x_min);
        read(model, "x_max", p.consts.x_max);
        read(model, "p0", p.consts.p0);
        read(model, "alpha", p.consts.alpha);
        read(model, "eta", p.consts.eta);
      }
    }

    if (const auto cal = root["calibration"]) {
      check_keys(cal, "calibration", {"enabled", "target", "tolerance", "high_set", "low_set"});
      read(cal, "enabled", cfg.calibration.enabled);
      read(cal, "target", cfg.calibration.target);
      read(cal, "tolerance", cfg.calibration.tolerance);
      read(cal, "high_set", cfg.calibration.high_set);
      read(cal, "low_set", cfg.calibration.low_set);
    }

    if (const auto pol = root["policy"]) {
      check_keys(pol, "policy", {"family", "targeting", "lognormal_form", "offers"});
      cfg.family = read_enum(pol, "family", cfg.family,
                             {{"normal", OfferFamily::Normal},
                              {"lognormal", OfferFamily::LogNormal}});
      cfg.targeting = read_enum(pol, "targeting", cfg.targeting,
                                {{"random", Targeting::Random},
                                 {"by_consumption_desc", Targeting::ByConsumptionDesc}});
      cfg.lognormal_form =
          read_enum(pol, "lognormal_form", cfg.lognormal_form,
                    {{"moment_matched", LogNormalForm::MomentMatched},
                     {"variance_shifted", LogNormalForm::VarianceShifted}});
      if (pol["offers"]) {
        cfg.offers.clear();
        for (const auto& pair : pol["offers"]) {
          const auto v = pair.as<std::vector<double>>();
          if (v.size() != 2) throw ConfigError("scenario: each offer entry needs [mu, sigma]");
          cfg.offers.push_back({v[0], v[1]});
        }
      }
    }

    if (cfg.kind == ScenarioKind::Stackelberg) {
      const StrategyGrid grid;
      cfg.k_values = grid.k_values;
      cfg.m_values = grid.m_values;
      cfg.mu_values = grid.mu_values;
      cfg.sigma_values = grid.sigma_values;
    }
    if (const auto game = root["game"]) {
      check_keys(game, "game",
                 {"k_values", "m_values", "h_values", "budgets", "mu_values", "sigma_values"});
      read(game, "k_values", cfg.k_values);
      read(game, "m_values", cfg.m_values);
      if (game["h_values"]) cfg.h_values = read_range(game, "h_values");
      if (game["budgets"]) cfg.budgets = read_range(game, "budgets");
      read(game, "mu_values", cfg.mu_values);
      read(game, "sigma_values", cfg.sigma_values);
    }

    if (const auto run = root["run"]) {
      check_keys(run, "run",
                 {"mode", "mc_reps", "replications", "seed", "output_dir", "ranking",
                  "admin_rate", "max_rounds", "workers"});
      read(run, "mc_reps", cfg.mc_reps);
      const auto kind = read_enum(run, "mode", EvaluationMode::Kind::Expected,
                                  {{"expected", EvaluationMode::Kind::Expected},
                                   {"mc", EvaluationMode::Kind::MonteCarlo}});
      cfg.mode = kind == EvaluationMode::Kind::Expected ? EvaluationMode::expected()
                                                        : EvaluationMode::monte_carlo(cfg.mc_reps);
      read(run, "replications", cfg.replications);
      read(run, "seed", cfg.seed);
      if (run["output_dir"]) cfg.output_dir = run["output_dir"].as<std::string>();
      cfg.pipeline.ranking =
          read_enum(run, "ranking", cfg.pipeline.ranking,
                    {{"expected_reduction", RankingKey::ExpectedReduction},
                     {"expected_consumption", RankingKey::ExpectedConsumption},
                     {"baseline_consumption", RankingKey::BaselineConsumption}});
      read(run, "admin_rate", cfg.pipeline.admin_rate);
      read(run, "max_rounds", cfg.pipeline.max_rounds);
      read(run, "workers", cfg.workers);
    }
  } catch (const YAML::Exception& e) {
    throw ConfigError(std::string("scenario: ") + e.what());
  }
  if (cfg.output_dir.empty()) cfg.output_dir = std::filesystem::path("out") / cfg.name;
  return cfg;
}

inline ScenarioConfig load_scenario(const std::filesystem::path& path) {
  YAML::Node root;
  try {
    root = YAML::LoadFile(path.string());
  } catch (const YAML::BadFile&) {
    throw ConfigError("scenario: cannot read " + path.string());
  } catch (const YAML::Exception& e) {
    throw ConfigError("scenario: " + path.string() + ": " + e.what());
  }
  auto cfg = parse_scenario(root);
  cfg.validate();
  return cfg;
}

inline ScenarioConfig parse_scenario_string(const std::string& text) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::Exception& e) {
    throw ConfigError(std::string("scenario: ") + e.what());
  }
  auto cfg = parse_scenario(root);
  cfg.validate();
  return cfg;
}

// --- catalog ----------------------------------------------------------------

struct CatalogEntry {
  std::string name;
  std::string description;
  std::filesystem::path path;
};

inline std::vector<CatalogEntry> list_scenarios(const std::filesystem::path& dir) {
  std::vector<CatalogEntry> out;
  if (!std::filesystem::is_directory(dir)) return out;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.path().extension() != ".yaml") continue;
    const auto cfg = load_scenario(entry.path());
    out.push_back({cfg.name, cfg.description, entry.path()});
  }
  std::sort(out.begin(), out.end(),
            [](const CatalogEntry& a, const CatalogEntry& b) { return a.name < b.name; });
  return out;
}

// A path to an existing file, otherwise a bundled scenario name.
inline std::filesystem::path resolve_scenario(const std::string& name_or_path,
                                              const std::filesystem::path& dir) {
  if (std::filesystem::is_regular_file(name_or_path)) return name_or_path;
  auto candidate = dir / (name_or_path + ".yaml");
  if (std::filesystem::is_regular_file(candidate)) return candidate;
  throw ConfigError("unknown scenario '" + name_or_path + "' (not a file, not in " +
                    dir.string() + ")");
}

// --- execution --------------------------------------------------------------

struct ReplicationInfo {
  std::uint64_t seed = 0;
  double lambda_mu = 0.0;
  double sum_r_min = 0.0;
  double max_reduction_pct = 0.0;
};

struct BitrateRow {
  double h = 0.0, budget = 0.0;
  std::uint64_t seed = 0;
  std::size_t id = 0;
  double x_h = 0.0, x_l = 0.0, p = 0.0, x_expected = 0.0, x_best_response = 0.0;
};

struct ScenarioResult {
  std::vector<ReplicationInfo> replications;
  std::vector<Population> populations;  // one per replication
  // Canonical order: grid indices, then replication.
  //   sweep:       offers pair, h, k, m, budget
  //   stackelberg: h, budget, k, m, mu, sigma
  std::vector<SweepRow> rows;
  // Stackelberg only: one row per (h, budget, replication).
  std::vector<SweepRow> equilibria;
  // Stackelberg only: per-user bitrates at the optimum of the first replication.
  std::vector<BitrateRow> bitrates;
};

inline std::uint64_t replication_seed(const ScenarioConfig& cfg, std::size_t r) {
  return cfg.seed + r;
}

inline Population replication_population(const ScenarioConfig& cfg, std::uint64_t seed,
                                         ReplicationInfo* info = nullptr) {
  PopulationConfig pc = cfg.population;
  pc.seed = seed;
  if (cfg.calibration.enabled) {
    PopulationConfig probe = pc;
    probe.high_set = cfg.calibration.high_set;
    probe.low_set = cfg.calibration.low_set;
    pc.lambda_mu = calibrate_lambda(probe, cfg.calibration.target, cfg.calibration.tolerance);
  }
  auto pop = generate(pc);
  if (info) {
    *info = {seed, pc.lambda_mu, total_min_incentive(pop),
             100.0 * pop.max_traffic_reduction_fraction()};
  }
  return pop;
}

inline ScenarioResult execute_scenario(const ScenarioConfig& cfg) {
  cfg.validate();
  const std::size_t reps = cfg.replications;
  ScenarioResult res;
  res.replications.resize(reps);
  for (std::size_t r = 0; r < reps; ++r) {
    res.populations.push_back(
        replication_population(cfg, replication_seed(cfg, r), &res.replications[r]));
  }

  if (cfg.kind == ScenarioKind::Sweep) {
    const std::size_t np = cfg.offers.size(), nh = cfg.h_values.size(),
                      nk = cfg.k_values.size(), nm = cfg.m_values.size(),
                      nb = cfg.budgets.size();
    const std::size_t tasks = np * nh * nk * nm * reps;
    std::vector<SweepRow> cells(tasks * nb);
    // Row index with the replication innermost.
    const auto cell = [&](std::size_t t, std::size_t bi) {
      const std::size_t r = t % reps;
      const std::size_t point = t / reps;
      return (point * nb + bi) * reps + r;
    };
    parallel_for(tasks, cfg.workers, [&](std::size_t t) {
      std::size_t rest = t;
      const std::size_t r = rest % reps;
      rest /= reps;
      const std::size_t mi = rest % nm;
      rest /= nm;
      const std::size_t ki = rest % nk;
      rest /= nk;
      const std::size_t hi = rest % nh;
      const std::size_t pi = rest / nh;
      const auto& pop = res.populations[r];
      const auto seed_r = res.replications[r].seed;
      const OfferPolicy policy{cfg.family, cfg.offers[pi].mu, cfg.offers[pi].sigma,
                               cfg.targeting, cfg.lognormal_form};
      const auto offer_seed = derive_seed(seed_r, {pi});
      for (std::size_t bi = 0; bi < nb; ++bi) {
        const GameConfig game{cfg.k_values[ki], cfg.m_values[mi], cfg.h_values[hi],
                              cfg.budgets[bi]};
        const auto out = evaluate_policy(pop, policy, game, offer_seed, cfg.mode, cfg.pipeline);
        cells[cell(t, bi)] = {game.k,    game.m,      policy.mu, policy.sigma,
                              game.h,    game.budget, seed_r,    out.metrics,
                              out.realized_switchers};
      }
    });
    res.rows = std::move(cells);
    return res;
  }

  // Stackelberg.
  const std::size_t nh = cfg.h_values.size(), nb = cfg.budgets.size();
  const std::size_t tasks = nh * nb * reps;
  std::vector<EquilibriumResult> eqs(tasks);
  parallel_for(tasks, cfg.workers, [&](std::size_t t) {
    const std::size_t r = t % reps;
    const std::size_t bi = (t / reps) % nb;
    const std::size_t hi = t / (reps * nb);
    StrategyGrid grid;
    grid.k_values = cfg.k_values;
    grid.m_values = cfg.m_values;
    grid.mu_values = cfg.mu_values;
    grid.sigma_values = cfg.sigma_values;
    grid.h = cfg.h_values[hi];
    grid.budget = cfg.budgets[bi];
    grid.family = cfg.family;
    grid.targeting = cfg.targeting;
    grid.lognormal_form = cfg.lognormal_form;
    eqs[t] = stackelberg_search(res.populations[r], grid, res.replications[r].seed, cfg.mode,
                                cfg.pipeline, 1);
  });

  for (std::size_t hi = 0; hi < nh; ++hi) {
    for (std::size_t bi = 0; bi < nb; ++bi) {
      const std::size_t base = (hi * nb + bi) * reps;
      const double h = cfg.h_values[hi], budget = cfg.budgets[bi];
      const std::size_t points = eqs[base].sweep.size();
      for (std::size_t i = 0; i < points; ++i) {
        for (std::size_t r = 0; r < reps; ++r) {
          const auto& g = eqs[base + r].sweep[i];
          res.rows.push_back({g.point.k, g.point.m, g.point.mu, g.point.sigma, h, budget,
                              res.replications[r].seed, g.metrics, g.realized_switchers});
        }
      }
      for (std::size_t r = 0; r < reps; ++r) {
        const auto& eq = eqs[base + r];
        res.equilibria.push_back({eq.k_star, eq.m_star, eq.mu_star, eq.sigma_star, h, budget,
                                  res.replications[r].seed, eq.metrics,
                                  eq.realized_switchers});
      }
      const auto& eq0 = eqs[base];
      const auto& pop0 = res.populations[0];
      for (std::size_t i = 0; i < pop0.size(); ++i) {
        res.bitrates.push_back({h, budget, res.replications[0].seed, i, pop0[i].x_h,
                                pop0[i].x_l, eq0.acceptance[i], eq0.per_user_bitrates[i],
                                eq0.best_response_bitrates[i]});
      }
    }
  }
  return res;
}

// --- summary ----------------------------------------------------------------

struct Stat {
  double mean = 0.0;
  double sd = 0.0;  // sample standard deviation, 0 for a single value
};

// Sums in the given order so results are reproducible from the CSV.
inline Stat describe(std::span<const double> v) {
  Stat s;
  if (v.empty()) return s;
  double total = 0.0;
  for (double x : v) total += x;
  s.mean = total / static_cast<double>(v.size());
  if (v.size() > 1) {
    double ss = 0.0;
    for (double x : v) ss += (x - s.mean) * (x - s.mean);
    s.sd = std::sqrt(ss / static_cast<double>(v.size() - 1));
  }
  return s;
}

// Replication means of one grid point.
struct PointSummary {
  SweepRow key;  // seed and metrics unused except as noted below
  Stat spend, traffic_kbps, traffic_pct, energy_w, co2_g, switchers_expected,
      switchers_realized;
};

// Groups consecutive rows that share every column except the seed.
inline std::vector<PointSummary> summarize_points(std::span<const SweepRow> rows) {
  std::vector<PointSummary> out;
  const auto same_point = [](const SweepRow& a, const SweepRow& b) {
    return a.k == b.k && a.m == b.m && a.mu == b.mu && a.sigma == b.sigma && a.h == b.h &&
           a.budget == b.budget;
  };
  std::size_t i = 0;
  while (i < rows.size()) {
    std::size_t j = i + 1;
    while (j < rows.size() && same_point(rows[i], rows[j])) ++j;
    std::vector<double> spend, tk, tp, e, c, se, sr;
    for (std::size_t q = i; q < j; ++q) {
      const auto& m = rows[q].metrics;
      spend.push_back(m.expected_spend);
      tk.push_back(m.expected_traffic_reduction);
      tp.push_back(m.traffic_reduction_pct);
      e.push_back(m.expected_energy_reduction);
      c.push_back(m.expected_co2_reduction);
      se.push_back(m.expected_switchers);
      sr.push_back(rows[q].switchers_realized);
    }
    PointSummary p;
    p.key = rows[i];
    p.spend = describe(spend);
    p.traffic_kbps = describe(tk);
    p.traffic_pct = describe(tp);
    p.energy_w = describe(e);
    p.co2_g = describe(c);
    p.switchers_expected = describe(se);
    p.switchers_realized = describe(sr);
    out.push_back(std::move(p));
    i = j;
  }
  return out;
}

// Strict "a beats b" on replication means, same rule as the grid search.
inline bool better_summary(const PointSummary& a, const PointSummary& b) {
  const auto key = [](const PointSummary& p) {
    return std::make_tuple(-p.energy_w.mean, p.spend.mean, p.key.k, p.key.m, p.key.mu,
                           p.key.sigma);
  };
  return key(a) < key(b);
}

// Index of the best point for every (h, budget), in first-seen order.
inline std::vector<std::size_t> argmax_by_h_budget(std::span<const PointSummary> points) {
  std::vector<std::pair<double, double>> groups;
  std::vector<std::size_t> best;
  for (std::size_t i = 0; i < points.size(); ++i) {
    const std::pair g{points[i].key.h, points[i].key.budget};
    const auto it = std::find(groups.begin(), groups.end(), g);
    if (it == groups.end()) {
      groups.push_back(g);
      best.push_back(i);
    } else {
      auto& b = best[static_cast<std::size_t>(it - groups.begin())];
      if (better_summary(points[i], points[b])) b = i;
    }
  }
  return best;
}

namespace detail {

inline nlohmann::ordered_json stat_json(const Stat& s) {
  return {{"mean", s.mean}, {"sd", s.sd}};
}

inline nlohmann::ordered_json point_json(const PointSummary& p) {
  return {{"k", p.key.k},
          {"m", p.key.m},
          {"mu", p.key.mu},
          {"sigma", p.key.sigma},
          {"h", p.key.h},
          {"budget", p.key.budget},
          {"spend", stat_json(p.spend)},
          {"traffic_kbps", stat_json(p.traffic_kbps)},
          {"traffic_pct", stat_json(p.traffic_pct)},
          {"energy_w", stat_json(p.energy_w)},
          {"co2_g", stat_json(p.co2_g)},
          {"switchers_expected", stat_json(p.switchers_expected)},
          {"switchers_realized", stat_json(p.switchers_realized)}};
}

inline nlohmann::ordered_json row_json(const SweepRow& r) {
  return {{"h", r.h},
          {"budget", r.budget},
          {"seed", r.seed},
          {"k", r.k},
          {"m", r.m},
          {"mu", r.mu},
          {"sigma", r.sigma},
          {"spend", r.metrics.expected_spend},
          {"traffic_pct", r.metrics.traffic_reduction_pct},
          {"energy_w", r.metrics.expected_energy_reduction},
          {"switchers_expected", r.metrics.expected_switchers},
          {"switchers_realized", r.switchers_realized}};
}

inline const char* name_of(ScenarioKind k) {
  return k == ScenarioKind::Sweep ? "sweep" : "stackelberg";
}
inline const char* name_of(OfferFamily f) {
  return f == OfferFamily::Normal ? "normal" : "lognormal";
}
inline const char* name_of(Targeting t) {
  return t == Targeting::Random ? "random" : "by_consumption_desc";
}
inline const char* name_of(LogNormalForm f) {
  return f == LogNormalForm::MomentMatched ? "moment_matched" : "variance_shifted";
}
inline const char* name_of(RankingKey k) {
  switch (k) {
    case RankingKey::ExpectedReduction:
      return "expected_reduction";
    case RankingKey::ExpectedConsumption:
      return "expected_consumption";
    case RankingKey::BaselineConsumption:
      break;
  }
  return "baseline_consumption";
}

}  // namespace detail

inline nlohmann::ordered_json to_json(const ScenarioConfig& c) {
  using detail::name_of;
  nlohmann::ordered_json offers = nlohmann::ordered_json::array();
  for (const auto& o : c.offers) offers.push_back({o.mu, o.sigma});
  nlohmann::ordered_json j = {
      {"name", c.name},
      {"description", c.description},
      {"kind", name_of(c.kind)},
      {"population", to_json(c.population)},
      {"calibration",
       {{"enabled", c.calibration.enabled},
        {"target", c.calibration.target},
        {"tolerance", c.calibration.tolerance},
        {"high_set", c.calibration.high_set},
        {"low_set", c.calibration.low_set}}},
      {"policy",
       {{"family", name_of(c.family)},
        {"targeting", name_of(c.targeting)},
        {"lognormal_form", name_of(c.lognormal_form)},
        {"offers", offers}}},
      {"game",
       {{"k_values", c.k_values},
        {"m_values", c.m_values},
        {"h_values", c.h_values},
        {"budgets", c.budgets},
        {"mu_values", c.mu_values},
        {"sigma_values", c.sigma_values}}},
      {"run",
       {{"mode", c.mode.kind == EvaluationMode::Kind::Expected ? "expected" : "mc"},
        {"mc_reps", c.mode.reps},
        {"replications", c.replications},
        {"seed", c.seed},
        {"output_dir", c.output_dir.string()},
        {"ranking", name_of(c.pipeline.ranking)},
        {"admin_rate", c.pipeline.admin_rate},
        {"max_rounds", c.pipeline.max_rounds},
        {"workers", c.workers}}}};
  // The population seed is per replication; the base seed lives under run.
  j["population"].erase("seed");
  return j;
}

inline nlohmann::ordered_json build_summary(const ScenarioConfig& cfg,
                                            const ScenarioResult& res) {
  const auto points = summarize_points(res.rows);
  nlohmann::ordered_json j;
  j["scenario"] = cfg.name;
  j["kind"] = detail::name_of(cfg.kind);
  j["replications"] = cfg.replications;
  auto pts = nlohmann::ordered_json::array();
  for (const auto& p : points) pts.push_back(detail::point_json(p));
  j["points"] = std::move(pts);
  auto best = nlohmann::ordered_json::array();
  for (auto i : argmax_by_h_budget(points)) best.push_back(detail::point_json(points[i]));
  j["argmax"] = std::move(best);
  if (cfg.kind == ScenarioKind::Stackelberg) {
    auto eqs = nlohmann::ordered_json::array();
    for (const auto& e : res.equilibria) eqs.push_back(detail::row_json(e));
    j["equilibria"] = std::move(eqs);
  }
  return j;
}

inline nlohmann::ordered_json build_meta(const ScenarioConfig& cfg, const ScenarioResult& res) {
  nlohmann::ordered_json reps = nlohmann::ordered_json::array();
  for (const auto& r : res.replications) {
    reps.push_back({{"seed", r.seed},
                    {"lambda_mu", r.lambda_mu},
                    {"sum_r_min", r.sum_r_min},
                    {"max_reduction_pct", r.max_reduction_pct}});
  }
  return {{"engine", "ecostream"},
          {"version", kEngineVersion},
          {"rng", kRngAlgorithm},
          {"config", to_json(cfg)},
          {"replications", std::move(reps)},
          {"offer_seed", "derive_seed(replication_seed, {offers_index})"},
          {"grid_seed", "derive_seed(replication_seed, {k_i, m_i, mu_i, sigma_i})"},
          {"population_csv_seed", res.replications.front().seed}};
}

inline void write_bitrates_csv(std::ostream& os, std::span<const BitrateRow> rows) {
  CsvWriter csv(os, {"h", "budget", "seed", "id", "x_h", "x_l", "p", "x_expected",
                     "x_best_response"});
  for (const auto& b : rows) {
    csv.field(b.h)
        .field(b.budget)
        .field(b.seed)
        .field(static_cast<std::uint64_t>(b.id))
        .field(b.x_h)
        .field(b.x_l)
        .field(b.p)
        .field(b.x_expected)
        .field(b.x_best_response);
    csv.end_row();
  }
}

inline void write_artifacts(const ScenarioConfig& cfg, const ScenarioResult& res,
                            const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  write_population(dir / "population.csv", res.populations.front());
  {
    auto os = open_output(dir / "sweep.csv");
    write_sweep_csv(os, res.rows);
  }
  if (cfg.kind == ScenarioKind::Stackelberg) {
    auto os = open_output(dir / "bitrates.csv");
    write_bitrates_csv(os, res.bitrates);
  }
  write_json(dir / "summary.json", build_summary(cfg, res));
  write_json(dir / "meta.json", build_meta(cfg, res));
}

inline ScenarioResult run_scenario(const ScenarioConfig& cfg) {
  auto res = execute_scenario(cfg);
  write_artifacts(cfg, res, cfg.output_dir);
  return res;
}

}  // namespace ecostream
