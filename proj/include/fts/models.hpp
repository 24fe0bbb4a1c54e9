#pragma once

#include <cmath>
#include <cstdint>

#include <Eigen/Core>

#include "fts/error.hpp"

namespace fts {

using Index = Eigen::Index;

// ---------------------------------------------------------------------------
// Critical-time noise
// ---------------------------------------------------------------------------

/// dz = -alpha z dt + noise_scale dW, z(0) = t0_value. noise_scale plays the
/// role of sigma/mu in both bubble models.
struct OuParams {
  double alpha = 0.0;
  double noise_scale = 0.0;
  double t0_value = 0.0;

  double stationary_variance() const { return noise_scale * noise_scale / (2.0 * alpha); }
};

void validate(const OuParams& ou);

/// Increments of one Wiener path on a uniform grid, dW[k] ~ N(0, dt).
struct WienerIncrements {
  double dt = 0.0;
  Eigen::VectorXd dW;

  Index steps() const { return dW.size(); }
};

WienerIncrements draw_increments(double dt, Index n_steps, std::uint64_t seed);

/// Sums consecutive blocks of `factor` increments: the same Brownian path
/// sampled on a grid `factor` times coarser.
WienerIncrements coarsen(const WienerIncrements& fine, Index factor);

struct OuPath {
  Eigen::VectorXd t_values;  // k * dt, k = 0..steps
  Eigen::VectorXd values;    // t~_c(t)
  WienerIncrements noise;
};

/// Euler-Maruyama OU path driven by the supplied increments.
OuPath simulate_ou(const OuParams& ou, const WienerIncrements& noise);
OuPath simulate_ou(const OuParams& ou, double dt, Index n_steps, std::uint64_t seed);

/// Critical time T_c + t~_c(t) sampled on t_values.
struct TcPath {
  Eigen::VectorXd t_values;
  Eigen::VectorXd tc_values;
  double T_c = 0.0;

  double critical_time(Index i) const { return T_c + tc_values[i]; }
  double time_to_singularity(Index i) const { return T_c + tc_values[i] - t_values[i]; }
};

// ---------------------------------------------------------------------------
// Model parameters
// ---------------------------------------------------------------------------

/// Price feedback model: dp = mu p^m (1 + delta) dt + sigma p^m dB.
struct Model1Params {
  double mu = 1.0;
  double m = 2.0;
  double p0 = 1.0;

  double beta() const { return 1.0 / (m - 1.0); }
  double K() const { return std::pow(beta() / mu, beta()); }
  /// Deterministic critical time (beta/mu) p0^(-1/beta).
  double critical_time() const { return beta() / mu * std::pow(p0, -1.0 / beta()); }
};

/// Momentum feedback model: dy = x (1 + gamma) dt + (sigma/mu) x dB,
/// dx = mu x^m (1 + delta) dt + sigma x^m dB, y = ln p.
struct Model2Params {
  double mu = 1.0;
  double m = 3.0;
  double A = 0.0;
  double x0 = 1.0;

  double beta() const { return 1.0 / (m - 1.0); }
  double B() const { return std::pow(beta() / mu, beta()) / (1.0 - beta()); }
  /// Deterministic critical time (beta/mu) x0^(-1/beta).
  double critical_time() const { return beta() / mu * std::pow(x0, -1.0 / beta()); }
};

void validate(const Model1Params& p);
void validate(const Model2Params& p);

/// Critical-time path whose mean T_c is shifted so that the closed form
/// reproduces the model's initial condition at t = 0.
TcPath model1_tc_path(const Model1Params& p, const OuPath& ou);
TcPath model2_tc_path(const Model2Params& p, const OuPath& ou);

// ---------------------------------------------------------------------------
// Closed forms
// ---------------------------------------------------------------------------

/// p = K (T~_c - t)^(-beta) given the time remaining to the singularity.
template <typename Scalar>
Scalar model1_price(const Model1Params& p, Scalar time_to_singularity) {
  using std::pow;
  if (!(time_to_singularity > Scalar(0))) {
    throw Error(Errc::past_singularity, "model-1 price is undefined at or past the critical time");
  }
  return Scalar(p.K()) * pow(time_to_singularity, Scalar(-p.beta()));
}

/// y = A - B (T~_c - t)^(1-beta); finite (= A) at the singularity.
template <typename Scalar>
Scalar model2_logprice(const Model2Params& p, Scalar time_to_singularity) {
  using std::pow;
  if (time_to_singularity < Scalar(0)) {
    throw Error(Errc::past_singularity, "model-2 log-price is undefined past the critical time");
  }
  return Scalar(p.A) - Scalar(p.B()) * pow(time_to_singularity, Scalar(1.0 - p.beta()));
}

/// x = [(m-1) mu (T~_c - t)]^(-1/(m-1)).
template <typename Scalar>
Scalar model2_momentum(const Model2Params& p, Scalar time_to_singularity) {
  using std::pow;
  if (!(time_to_singularity > Scalar(0))) {
    throw Error(Errc::past_singularity, "model-2 momentum diverges at the critical time");
  }
  return pow(Scalar((p.m - 1.0) * p.mu) * time_to_singularity, Scalar(-p.beta()));
}

double model1_price_closed_form(const Model1Params& p, const TcPath& path, Index i);
Eigen::VectorXd model1_price_closed_form(const Model1Params& p, const TcPath& path);
double model2_logprice_closed_form(const Model2Params& p, const TcPath& path, Index i);
Eigen::VectorXd model2_logprice_closed_form(const Model2Params& p, const TcPath& path);

// ---------------------------------------------------------------------------
// SDE simulation
// ---------------------------------------------------------------------------

struct SdeOptions {
  /// Halt once p (model 1) or x (model 2) exceeds this multiple of its start.
  double overflow_factor = 1e12;
  /// Return the valid prefix instead of throwing Blowup.
  bool truncate_on_blowup = false;
  /// Include the regulator terms delta and gamma. Off reduces model 1 at m = 1
  /// to geometric Brownian motion.
  bool regulator = true;
};

struct Model1Path {
  Eigen::VectorXd t_values;
  Eigen::VectorXd price;
  OuPath critical;       // co-simulated t~_c on the same grid
  Index halted_at = -1;  // step that tripped the guard, -1 if none
};

struct Model2Path {
  Eigen::VectorXd t_values;
  Eigen::VectorXd log_price;
  Eigen::VectorXd momentum;
  OuPath critical;
  Index halted_at = -1;
};

/// Euler-Maruyama for the price model with sigma = ou.noise_scale * mu. The
/// same increments drive t~_c; the price loads on them with the opposite sign
/// (a positive shock raises the price and pulls the critical time closer),
/// which is what makes the closed form an exact pathwise solution.
Model1Path simulate_model1_sde(const Model1Params& p, const OuParams& ou, const WienerIncrements& noise,
                               const SdeOptions& opts = {});
Model1Path simulate_model1_sde(const Model1Params& p, const OuParams& ou, double dt, Index n_steps,
                               std::uint64_t seed, const SdeOptions& opts = {});

/// Euler-Maruyama for the (y, x) momentum model; same noise convention.
Model2Path simulate_model2_sde(const Model2Params& p, const OuParams& ou, const WienerIncrements& noise,
                               const SdeOptions& opts = {});
Model2Path simulate_model2_sde(const Model2Params& p, const OuParams& ou, double dt, Index n_steps,
                               std::uint64_t seed, const SdeOptions& opts = {});

// ---------------------------------------------------------------------------
// Log-returns over a horizon tau, given the time to singularity D at t and
// the critical-time increment delta_tc over [t, t + tau]
// ---------------------------------------------------------------------------

template <typename Scalar>
Scalar model1_return_exact(const Model1Params& p, Scalar D, Scalar delta_tc, Scalar tau) {
  using std::log1p;
  return Scalar(-p.beta()) * log1p((delta_tc - tau) / D);
}

template <typename Scalar>
Scalar model1_return_approx(const Model1Params& p, Scalar D, Scalar delta_tc, Scalar tau) {
  return Scalar(p.beta()) / D * (tau - delta_tc);
}

template <typename Scalar>
Scalar model2_return_exact(const Model2Params& p, Scalar D, Scalar delta_tc, Scalar tau) {
  using std::pow;
  const Scalar one_minus_beta(1.0 - p.beta());
  return Scalar(-p.B()) * pow(D, one_minus_beta) * (pow(Scalar(1) + (delta_tc - tau) / D, one_minus_beta) - Scalar(1));
}

template <typename Scalar>
Scalar model2_return_approx(const Model2Params& p, Scalar D, Scalar delta_tc, Scalar tau) {
  using std::pow;
  return Scalar((1.0 - p.beta()) * p.B()) * pow(D, Scalar(-p.beta())) * (tau - delta_tc);
}

}  // namespace fts
