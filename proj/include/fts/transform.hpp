#pragma once

#include <cmath>
#include <utility>

#include <Eigen/Core>

#include "fts/error.hpp"
#include "fts/timeseries.hpp"

namespace fts {

/// Candidate critical times T~_c(t) over a window, their mean and the
/// zero-mean residual t~_c(t).
struct CriticalTimePath {
  Eigen::VectorXd t_values;
  Eigen::VectorXd T_tilde;
  double T_c_hat = 0.0;
  Eigen::VectorXd residual;
};

/// T~_c(t) = c1 p(t)^(-1/beta) + t. The prefactor c1 absorbs the price
/// scale; the underlying model has c1 = beta/mu.
struct Model1SearchPoint {
  double c1 = 1.0;
  double beta = 1.0;

  double m() const { return 1.0 + 1.0 / beta; }
  double mu() const { return beta / c1; }
};

/// T~_c(t) = t + ((A - ln p(t)) / B)^(1/(1-beta)).
struct Model2SearchPoint {
  double A = 0.0;
  double B = 1.0;
  double beta = 0.5;

  double m() const { return 1.0 + 1.0 / beta; }
  double mu() const { return beta * std::pow((1.0 - beta) * B, -1.0 / beta); }
};

template <typename Derived>
std::pair<double, Eigen::VectorXd> split_mean_residual(const Eigen::MatrixBase<Derived>& series) {
  if (series.size() == 0) throw Error(Errc::empty_series, "cannot split an empty series");
  const double mean = static_cast<double>(series.mean());
  Eigen::VectorXd residual = series.template cast<double>().array() - mean;
  return {mean, std::move(residual)};
}

template <typename DerivedP, typename DerivedT>
CriticalTimePath invert_model1(const Eigen::MatrixBase<DerivedP>& prices, const Eigen::MatrixBase<DerivedT>& t,
                               const Model1SearchPoint& point) {
  if (!(point.c1 > 0.0) || !(point.beta > 0.0) || !std::isfinite(point.c1)) {
    throw Error(Errc::invalid_search_point, "model-1 search point needs c1 > 0 and beta > 0");
  }
  if (prices.size() != t.size()) throw Error(Errc::invalid_parameter, "prices and times differ in length");
  CriticalTimePath out;
  out.t_values = t.template cast<double>();
  // exp(ln c1 - ln p / beta) keeps c1 * p^(-1/beta) finite when c1 is huge.
  const double log_c1 = std::log(point.c1);
  out.T_tilde = ((log_c1 - prices.template cast<double>().array().log() / point.beta).exp() +
                 out.t_values.array())
                    .matrix();
  auto [mean, residual] = split_mean_residual(out.T_tilde);
  out.T_c_hat = mean;
  out.residual = std::move(residual);
  return out;
}

template <typename DerivedP, typename DerivedT>
CriticalTimePath invert_model2(const Eigen::MatrixBase<DerivedP>& prices, const Eigen::MatrixBase<DerivedT>& t,
                               const Model2SearchPoint& point) {
  if (!(point.B > 0.0) || !(point.beta > 0.0) || !(point.beta < 1.0) || !std::isfinite(point.A)) {
    throw Error(Errc::invalid_search_point, "model-2 search point needs B > 0 and 0 < beta < 1");
  }
  if (prices.size() != t.size()) throw Error(Errc::invalid_parameter, "prices and times differ in length");
  const Eigen::ArrayXd gap = point.A - prices.template cast<double>().array().log();
  if ((gap < 0.0).any()) {
    throw Error(Errc::domain_violation, "A lies below the window's maximum log-price");
  }
  CriticalTimePath out;
  out.t_values = t.template cast<double>();
  out.T_tilde = ((gap / point.B).pow(1.0 / (1.0 - point.beta)) + out.t_values.array()).matrix();
  auto [mean, residual] = split_mean_residual(out.T_tilde);
  out.T_c_hat = mean;
  out.residual = std::move(residual);
  return out;
}

inline CriticalTimePath invert_model1(const PriceWindow& window, const Model1SearchPoint& point) {
  return invert_model1(window.prices(), window.t_values(), point);
}

inline CriticalTimePath invert_model2(const PriceWindow& window, const Model2SearchPoint& point) {
  return invert_model2(window.prices(), window.t_values(), point);
}

}  // namespace fts
