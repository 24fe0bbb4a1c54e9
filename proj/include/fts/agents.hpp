#pragma once

#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "fts/models.hpp"

namespace fts {

/// An arbitrageur's crash belief: hazard c_i (T_ci - t)^(-beta_i), expected
/// crash fraction kappa, and the time the position is opened.
struct ArbitrageurBelief {
  double T_ci = 0.0;
  double beta_i = 1.0;
  double c_i = 1.0;
  double kappa = 0.5;
  double t_entry = 0.0;
};

void validate(const ArbitrageurBelief& b);

struct ExitSolution {
  double t_exit = 0.0;
  double residual = 0.0;  // log-form first-order condition at t_exit
  std::pair<double, double> bracket;
};

double hazard_rate(const ArbitrageurBelief& b, double t);

/// Exit date in the deterministic limit: the first time the expected
/// relative gain falls to kappa times the hazard, on (t_entry, min(T_c, T_ci)).
/// Price model gain: beta / (T_c - t). Momentum model gain: x(t).
/// Throws NoInteriorExit when the condition has no crossing in the bracket.
ExitSolution exit_time_model1(const ArbitrageurBelief& b, const Model1Params& market);
ExitSolution exit_time_model2(const ArbitrageurBelief& b, const Model2Params& market);

using Market = std::variant<Model1Params, Model2Params>;

struct Agent {
  std::string id;
  ArbitrageurBelief belief;
};

struct Population {
  Market market;
  std::vector<Agent> agents;
};

/// {"market": {"model": "fts-price", "mu", "m", "p0"} or
///            {"model": "fts-momentum", "mu", "m", "A", "x0"},
///  "agents": [{"id", "T_ci", "beta_i", "c_i", "kappa", "t_entry"}, ...]}
Population population_from_json(const std::string& text);

/// Absent entries are agents without an interior exit. Order follows the
/// population whatever `jobs` is.
std::vector<std::optional<ExitSolution>> solve_population(const Population& population, unsigned jobs = 1);

/// `agent_id,t_exit,residual`; agents without an interior exit get empty fields.
std::string exit_times_csv(const Population& population, const std::vector<std::optional<ExitSolution>>& solutions);

}  // namespace fts
