#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <string>

#include <Eigen/Core>

#include "fts/error.hpp"

namespace fts {

using Index = Eigen::Index;

/// Dickey-Fuller regression dx_t = rho x_{t-1} + e_t without intercept or
/// augmentation lags. `reject` is meaningful only after a decision against
/// a critical value; `degenerate` marks inputs whose statistic is undefined.
struct DfResult {
  double rho_hat = 0.0;
  double t_stat = 0.0;
  Index n_obs = 0;
  bool reject = false;
  bool degenerate = false;
};

template <typename Derived>
DfResult df_tstat(const Eigen::MatrixBase<Derived>& series) {
  const Index n = series.size();
  if (n < 3) throw Error(Errc::series_too_short, "Dickey-Fuller regression needs at least 3 points");
  const Eigen::VectorXd x = series.template cast<double>();
  const auto lag = x.head(n - 1);
  const Eigen::VectorXd diff = x.tail(n - 1) - lag;

  const double sxx = lag.squaredNorm();
  if (sxx == 0.0) throw Error(Errc::degenerate_regressor, "lagged level is identically zero");
  const double rho = lag.dot(diff) / sxx;
  const double ssr = (diff - rho * lag).squaredNorm();
  if (ssr == 0.0) throw Error(Errc::zero_residual_variance, "regression residuals are exactly zero");

  DfResult out;
  out.n_obs = n - 1;
  out.rho_hat = rho;
  out.t_stat = rho / std::sqrt(ssr / static_cast<double>(out.n_obs - 1) / sxx);
  return out;
}

/// Lower-tail critical values of the no-intercept Dickey-Fuller t statistic,
/// keyed by series length, all at one significance level.
struct CriticalValueTable {
  double level = 0.005;
  Index reps = 0;
  std::uint64_t seed = 0;
  std::map<Index, double> values;

  bool contains(Index length) const { return values.count(length) != 0; }
  double at(Index length) const;
};

/// Empirical `level` quantile of df_tstat over `reps` driftless Gaussian
/// random walks of `length` points. Replication r draws from its own stream
/// derive_seed(seed, r), so the value does not depend on `jobs`.
double df_critical_value(Index length, double level, Index reps, std::uint64_t seed, unsigned jobs = 1);

CriticalValueTable build_critical_value_table(const std::vector<Index>& lengths, double level, Index reps,
                                              std::uint64_t seed, unsigned jobs = 1);

/// Tests `series` against the table entry for its length. Degenerate inputs
/// come back as non-rejections with `degenerate` set rather than throwing.
template <typename Derived>
DfResult reject_unit_root(const Eigen::MatrixBase<Derived>& series, const CriticalValueTable& table) {
  const double critical = table.at(series.size());
  try {
    DfResult r = df_tstat(series);
    r.reject = r.t_stat < critical;
    return r;
  } catch (const Error& e) {
    if (e.code() != Errc::zero_residual_variance && e.code() != Errc::degenerate_regressor) throw;
    DfResult r;
    r.n_obs = series.size() - 1;
    r.degenerate = true;
    r.t_stat = std::nan("");
    return r;
  }
}

std::string to_json(const CriticalValueTable& table);
CriticalValueTable critical_value_table_from_json(const std::string& text);
CriticalValueTable load_critical_value_table(const std::string& path);
void save_critical_value_table(const CriticalValueTable& table, const std::string& path);

/// Table shipped in the data directory (lengths 750 and 900, level 0.005).
std::string default_critical_value_table_path();

}  // namespace fts
