#pragma once

// CSV and JSON artifacts.
//
// CSV dialect: comma separator, '.' decimal point, header row, LF line
// endings, UTF-8. Floating-point fields use the shortest representation that
// round-trips (std::to_chars), so output bytes depend only on the values.

#include <array>
#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include <nlohmann/json.hpp>

#include "ecostream/error.hpp"
#include "ecostream/game.hpp"
#include "ecostream/population.hpp"
#include "ecostream/rng.hpp"

namespace ecostream {

inline std::string format_number(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc{}) throw std::runtime_error("format_number: to_chars failed");
  return {buf, end};
}

class CsvWriter {
 public:
  CsvWriter(std::ostream& os, std::span<const std::string_view> header) : os_(os) {
    for (auto h : header) field(h);
    end_row();
  }
  CsvWriter(std::ostream& os, std::initializer_list<std::string_view> header)
      : CsvWriter(os, std::span<const std::string_view>(header.begin(), header.size())) {}

  CsvWriter& field(std::string_view s) {
    sep();
    os_ << s;
    return *this;
  }
  CsvWriter& field(double v) { return field(std::string_view(format_number(v))); }
  CsvWriter& field(std::uint64_t v) { return field(std::string_view(std::to_string(v))); }

  void end_row() {
    os_ << '\n';
    row_begin();
  }

 private:
  void row_begin() { first_ = true; }
  void sep() {
    if (!first_) os_ << ',';
    first_ = false;
  }

  std::ostream& os_;
  bool first_ = true;
};

inline std::ofstream open_output(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open " + path.string() + " for writing");
  return os;
}

inline void write_population_csv(std::ostream& os, const Population& pop) {
  CsvWriter csv(os, {"id", "x_h", "x_l", "gamma", "delta", "r_min", "s", "du"});
  for (const auto& u : pop.users()) {
    csv.field(static_cast<std::uint64_t>(u.id))
        .field(u.x_h)
        .field(u.x_l)
        .field(u.gamma)
        .field(u.delta)
        .field(u.r_min)
        .field(u.s)
        .field(u.du);
    csv.end_row();
  }
}

inline nlohmann::ordered_json to_json(const ModelConstants& c) {
  return {{"x_min", c.x_min}, {"x_max", c.x_max}, {"p0", c.p0},         {"alpha", c.alpha},
          {"eta", c.eta},     {"mos_lo", c.mos_lo}, {"mos_hi", c.mos_hi}};
}

inline nlohmann::ordered_json to_json(const PopulationConfig& c) {
  return {{"n_users", c.n_users},
          {"high_set", c.high_set},
          {"low_set", c.low_set},
          {"gamma_range", {c.gamma_range.lo, c.gamma_range.hi}},
          {"delta_range", {c.delta_range.lo, c.delta_range.hi}},
          {"lambda_mu", c.lambda_mu},
          {"energy_price", c.energy_price},
          {"seed", c.seed},
          {"model", to_json(c.consts)}};
}

inline nlohmann::ordered_json population_sidecar(const Population& pop) {
  const auto& t = pop.totals();
  return {{"config", to_json(pop.config())},
          {"rng", kRngAlgorithm},
          {"totals",
           {{"baseline_traffic_kbps", t.baseline_traffic},
            {"baseline_energy_w", t.baseline_energy},
            {"min_traffic_kbps", t.min_traffic},
            {"sum_r_min", total_min_incentive(pop)}}}};
}

inline void write_json(const std::filesystem::path& path, const nlohmann::ordered_json& j) {
  auto os = open_output(path);
  os << j.dump(2) << '\n';
}

inline void write_population(const std::filesystem::path& csv_path, const Population& pop) {
  {
    auto os = open_output(csv_path);
    write_population_csv(os, pop);
  }
  auto sidecar = csv_path;
  sidecar.replace_extension(".json");
  write_json(sidecar, population_sidecar(pop));
}

// One row of the sweep log.
struct SweepRow {
  std::size_t k = 0, m = 0;
  double mu = 0.0, sigma = 0.0, h = 0.0, budget = 0.0;
  std::uint64_t seed = 0;
  OutcomeMetrics metrics;
  double switchers_realized = 0.0;
};

inline constexpr std::array<std::string_view, 14> kSweepHeader = {
    "k",        "m",        "mu",       "sigma",  "h",
    "budget",   "seed",     "spend",    "traffic_kbps", "traffic_pct",
    "energy_w", "co2_g",    "switchers_expected", "switchers_realized"};

inline void write_sweep_row(CsvWriter& csv, const SweepRow& r) {
  csv.field(static_cast<std::uint64_t>(r.k))
      .field(static_cast<std::uint64_t>(r.m))
      .field(r.mu)
      .field(r.sigma)
      .field(r.h)
      .field(r.budget)
      .field(r.seed)
      .field(r.metrics.expected_spend)
      .field(r.metrics.expected_traffic_reduction)
      .field(r.metrics.traffic_reduction_pct)
      .field(r.metrics.expected_energy_reduction)
      .field(r.metrics.expected_co2_reduction)
      .field(r.metrics.expected_switchers)
      .field(r.switchers_realized);
  csv.end_row();
}

inline void write_sweep_csv(std::ostream& os, std::span<const SweepRow> rows) {
  CsvWriter csv(os, kSweepHeader);
  for (const auto& r : rows) write_sweep_row(csv, r);
}

// Minimal reader for files this module writes (no quoting).
inline std::vector<std::vector<std::string>> read_csv(std::istream& is) {
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(is, line)) {
    std::vector<std::string> fields;
    std::size_t start = 0;
    for (;;) {
      const auto comma = line.find(',', start);
      fields.push_back(line.substr(start, comma - start));
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    rows.push_back(std::move(fields));
  }
  return rows;
}

}  // namespace ecostream
