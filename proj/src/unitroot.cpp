#include "fts/unitroot.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <thread>
#include <vector>

#include <json.hpp>

#include "fts/random.hpp"

namespace fts {

namespace {

// No-intercept DF t statistic of a fresh Gaussian random walk, accumulated in
// one pass without materialising the series.
double random_walk_tstat(Index length, std::uint64_t seed) {
  NormalStream normal(seed);
  double x = normal();
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (Index t = 1; t < length; ++t) {
    const double e = normal();
    sxx += x * x;
    sxy += x * e;
    syy += e * e;
    x += e;
  }
  const double rho = sxy / sxx;
  const double ssr = syy - rho * sxy;
  const double dof = static_cast<double>(length - 2);
  return rho / std::sqrt(ssr / dof / sxx);
}

double empirical_quantile(std::vector<double> values, double level) {
  const double h = level * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(lo), values.end());
  const double a = values[lo];
  if (lo + 1 >= values.size()) return a;
  const double b = *std::min_element(values.begin() + static_cast<std::ptrdiff_t>(lo) + 1, values.end());
  return a + (h - static_cast<double>(lo)) * (b - a);
}

}  // namespace

double CriticalValueTable::at(Index length) const {
  auto it = values.find(length);
  if (it == values.end()) {
    throw Error(Errc::missing_length, "no critical value for series length " + std::to_string(length), length);
  }
  return it->second;
}

double df_critical_value(Index length, double level, Index reps, std::uint64_t seed, unsigned jobs) {
  if (!(level > 0.0 && level < 0.5)) throw Error(Errc::invalid_level, "level must lie in (0, 0.5)");
  if (reps < 10000) throw Error(Errc::insufficient_reps, "need at least 1e4 replications", reps);
  if (length < 3) throw Error(Errc::series_too_short, "series length must be at least 3");

  std::vector<double> stats(static_cast<std::size_t>(reps));
  const unsigned workers = std::max(1u, jobs);
  auto work = [&](unsigned w) {
    for (Index r = w; r < reps; r += workers) {
      stats[static_cast<std::size_t>(r)] = random_walk_tstat(length, derive_seed(seed, static_cast<std::uint64_t>(r)));
    }
  };
  if (workers == 1) {
    work(0);
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work, w);
    for (auto& th : pool) th.join();
  }
  return empirical_quantile(std::move(stats), level);
}

CriticalValueTable build_critical_value_table(const std::vector<Index>& lengths, double level, Index reps,
                                              std::uint64_t seed, unsigned jobs) {
  CriticalValueTable table{level, reps, seed, {}};
  for (Index length : lengths) table.values[length] = df_critical_value(length, level, reps, seed, jobs);
  return table;
}

std::string to_json(const CriticalValueTable& table) {
  nlohmann::ordered_json j;
  j["level"] = table.level;
  j["reps"] = table.reps;
  j["seed"] = table.seed;
  j["critical_values"] = nlohmann::ordered_json::array();
  for (const auto& [length, value] : table.values) {
    j["critical_values"].push_back({{"length", length}, {"critical_value", value}});
  }
  return j.dump(2) + "\n";
}

CriticalValueTable critical_value_table_from_json(const std::string& text) {
  try {
    const auto j = nlohmann::json::parse(text);
    CriticalValueTable table;
    table.level = j.at("level").get<double>();
    table.reps = j.at("reps").get<Index>();
    table.seed = j.at("seed").get<std::uint64_t>();
    for (const auto& row : j.at("critical_values")) {
      table.values[row.at("length").get<Index>()] = row.at("critical_value").get<double>();
    }
    return table;
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::io_error, std::string("bad critical-value table: ") + e.what());
  }
}

CriticalValueTable load_critical_value_table(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::io_error, "cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return critical_value_table_from_json(buf.str());
}

void save_critical_value_table(const CriticalValueTable& table, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error(Errc::io_error, "cannot write " + path);
  out << to_json(table);
}

std::string default_critical_value_table_path() { return std::string(FTS_DATA_DIR) + "/df_critical_values.json"; }

}  // namespace fts
