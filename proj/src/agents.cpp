#include "fts/agents.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <functional>
#include <thread>
#include <type_traits>

#include <json.hpp>

#include "fts/calibrate.hpp"

namespace fts {

namespace {

constexpr double kTimeTolerance = 1e-12;

// First + to - crossing of g on (t_entry, edge). g is sampled at distances
// from the edge shrinking geometrically by 2^(1/16) (down to ~1e-15 of the
// bracket width), which resolves the power-law terms evenly in log time.
ExitSolution solve_foc(const std::function<double(double)>& g, double t_entry, double edge) {
  const double width = edge - t_entry;
  double lo = t_entry;
  if (!(g(lo) > 0.0)) {
    throw Error(Errc::no_interior_exit, "hazard already exceeds the expected gain at entry");
  }
  double hi = lo;
  bool found = false;
  for (int k = 1; k <= 16 * 50; ++k) {
    const double t = edge - width * std::exp2(-k / 16.0);
    if (!(t > lo) || !(t < edge)) break;
    const double value = g(t);
    if (value <= 0.0) {
      hi = t;
      found = true;
      break;
    }
    lo = t;
  }
  if (!found) throw Error(Errc::no_interior_exit, "expected gain exceeds the hazard up to the bracket edge");

  const std::pair<double, double> bracket{lo, hi};
  while (hi - lo > kTimeTolerance) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (g(mid) > 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  // Report whichever end sits closer to the root.
  const double g_hi = g(hi);
  const double g_low = g(lo);
  const double t_exit = std::abs(g_low) < std::abs(g_hi) ? lo : hi;
  return {t_exit, g(t_exit), bracket};
}

void check_horizon(const ArbitrageurBelief& b, double T_c) {
  validate(b);
  if (!(b.t_entry < T_c)) throw Error(Errc::invalid_parameter, "entry must precede the market critical time");
}

double number(const nlohmann::json& j, const char* key) { return j.at(key).get<double>(); }

}  // namespace

void validate(const ArbitrageurBelief& b) {
  if (!(b.t_entry < b.T_ci)) throw Error(Errc::invalid_parameter, "entry must precede the believed critical time");
  if (!(b.beta_i > 0.0)) throw Error(Errc::invalid_parameter, "hazard exponent must be positive");
  if (!(b.c_i > 0.0)) throw Error(Errc::invalid_parameter, "hazard constant must be positive");
  if (!(b.kappa > 0.0 && b.kappa < 1.0)) throw Error(Errc::invalid_parameter, "crash fraction must lie in (0, 1)");
}

double hazard_rate(const ArbitrageurBelief& b, double t) {
  if (!(t < b.T_ci)) throw Error(Errc::past_critical_time, "hazard undefined at or after the believed critical time");
  return b.c_i * std::pow(b.T_ci - t, -b.beta_i);
}

ExitSolution exit_time_model1(const ArbitrageurBelief& b, const Model1Params& market) {
  validate(market);
  const double T_c = market.critical_time();
  check_horizon(b, T_c);
  const double log_beta = std::log(market.beta());
  const double log_kc = std::log(b.kappa * b.c_i);
  auto g = [&](double t) { return log_beta - std::log(T_c - t) - log_kc + b.beta_i * std::log(b.T_ci - t); };
  return solve_foc(g, b.t_entry, std::min(T_c, b.T_ci));
}

ExitSolution exit_time_model2(const ArbitrageurBelief& b, const Model2Params& market) {
  validate(market);
  const double T_c = market.critical_time();
  check_horizon(b, T_c);
  const double beta = market.beta();
  const double log_scale = std::log((market.m - 1.0) * market.mu);
  const double log_kc = std::log(b.kappa * b.c_i);
  auto g = [&](double t) {
    return -beta * (log_scale + std::log(T_c - t)) - log_kc + b.beta_i * std::log(b.T_ci - t);
  };
  return solve_foc(g, b.t_entry, std::min(T_c, b.T_ci));
}

Population population_from_json(const std::string& text) {
  try {
    const auto j = nlohmann::json::parse(text);
    Population pop;
    const auto& m = j.at("market");
    const Model model = parse_model(m.at("model").get<std::string>());
    if (model == Model::price) {
      Model1Params p{number(m, "mu"), number(m, "m"), number(m, "p0")};
      validate(p);
      pop.market = p;
    } else {
      Model2Params p{number(m, "mu"), number(m, "m"), m.value("A", 0.0), number(m, "x0")};
      validate(p);
      pop.market = p;
    }
    std::size_t k = 0;
    for (const auto& a : j.at("agents")) {
      Agent agent;
      agent.id = a.contains("id") ? (a["id"].is_string() ? a["id"].get<std::string>() : a["id"].dump())
                                  : std::to_string(k);
      agent.belief = {number(a, "T_ci"), number(a, "beta_i"), number(a, "c_i"), number(a, "kappa"),
                      number(a, "t_entry")};
      validate(agent.belief);
      pop.agents.push_back(std::move(agent));
      ++k;
    }
    return pop;
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::io_error, std::string("bad belief population: ") + e.what());
  }
}

std::vector<std::optional<ExitSolution>> solve_population(const Population& population, unsigned jobs) {
  const std::size_t n = population.agents.size();
  std::vector<std::optional<ExitSolution>> out(n);
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t k = next++; k < n; k = next++) {
      const ArbitrageurBelief& b = population.agents[k].belief;
      try {
        out[k] = std::visit(
            [&](const auto& market) {
              if constexpr (std::is_same_v<std::decay_t<decltype(market)>, Model1Params>) {
                return exit_time_model1(b, market);
              } else {
                return exit_time_model2(b, market);
              }
            },
            population.market);
      } catch (const Error& e) {
        if (e.code() != Errc::no_interior_exit && e.code() != Errc::invalid_parameter) throw;
      }
    }
  };
  const unsigned workers = std::max(1u, jobs);
  if (workers == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& th : pool) th.join();
  }
  return out;
}

std::string exit_times_csv(const Population& population, const std::vector<std::optional<ExitSolution>>& solutions) {
  std::string out = "agent_id,t_exit,residual\n";
  char buf[96];
  for (std::size_t k = 0; k < population.agents.size(); ++k) {
    out += population.agents[k].id;
    if (solutions[k]) {
      std::snprintf(buf, sizeof buf, ",%.17g,%.3e\n", solutions[k]->t_exit, solutions[k]->residual);
      out += buf;
    } else {
      out += ",,\n";
    }
  }
  return out;
}

}  // namespace fts
