#include "fts/models.hpp"

#include <string>

#include "fts/random.hpp"

namespace fts {

namespace {

void check_step(double dt, Index n_steps) {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw Error(Errc::invalid_step, "dt must be positive");
  if (n_steps < 1) throw Error(Errc::invalid_step, "need at least one step");
}

void check_noise(const WienerIncrements& noise) { check_step(noise.dt, noise.steps()); }

Eigen::VectorXd time_grid(double dt, Index n_steps) {
  Eigen::VectorXd t(n_steps + 1);
  for (Index k = 0; k <= n_steps; ++k) t[k] = static_cast<double>(k) * dt;
  return t;
}

}  // namespace

void validate(const OuParams& ou) {
  if (!(ou.alpha >= 0.0) || !(ou.noise_scale >= 0.0) || !std::isfinite(ou.t0_value)) {
    throw Error(Errc::invalid_parameter, "OU parameters need alpha >= 0 and noise_scale >= 0");
  }
}

void validate(const Model1Params& p) {
  if (!(p.mu > 0.0) || !(p.m > 1.0) || !(p.p0 > 0.0)) {
    throw Error(Errc::invalid_parameter, "model 1 needs mu > 0, m > 1, p0 > 0");
  }
}

void validate(const Model2Params& p) {
  if (!(p.mu > 0.0) || !(p.m > 2.0) || !(p.x0 > 0.0) || !std::isfinite(p.A)) {
    throw Error(Errc::invalid_parameter, "model 2 needs mu > 0, m > 2, x0 > 0");
  }
}

WienerIncrements draw_increments(double dt, Index n_steps, std::uint64_t seed) {
  check_step(dt, n_steps);
  NormalStream normal(seed);
  return {dt, normal.draw(n_steps, std::sqrt(dt))};
}

WienerIncrements coarsen(const WienerIncrements& fine, Index factor) {
  if (factor < 1 || fine.steps() % factor != 0) {
    throw Error(Errc::invalid_step, "coarsening factor must divide the number of steps");
  }
  const Index n = fine.steps() / factor;
  WienerIncrements out{fine.dt * static_cast<double>(factor), Eigen::VectorXd(n)};
  for (Index k = 0; k < n; ++k) out.dW[k] = fine.dW.segment(k * factor, factor).sum();
  return out;
}

OuPath simulate_ou(const OuParams& ou, const WienerIncrements& noise) {
  validate(ou);
  check_noise(noise);
  const Index n = noise.steps();
  OuPath path{time_grid(noise.dt, n), Eigen::VectorXd(n + 1), noise};
  path.values[0] = ou.t0_value;
  for (Index k = 0; k < n; ++k) {
    const double z = path.values[k];
    path.values[k + 1] = z - ou.alpha * z * noise.dt + ou.noise_scale * noise.dW[k];
  }
  return path;
}

OuPath simulate_ou(const OuParams& ou, double dt, Index n_steps, std::uint64_t seed) {
  return simulate_ou(ou, draw_increments(dt, n_steps, seed));
}

TcPath model1_tc_path(const Model1Params& p, const OuPath& ou) {
  validate(p);
  return {ou.t_values, ou.values, p.critical_time() - ou.values[0]};
}

TcPath model2_tc_path(const Model2Params& p, const OuPath& ou) {
  validate(p);
  return {ou.t_values, ou.values, p.critical_time() - ou.values[0]};
}

double model1_price_closed_form(const Model1Params& p, const TcPath& path, Index i) {
  return model1_price(p, path.time_to_singularity(i));
}

Eigen::VectorXd model1_price_closed_form(const Model1Params& p, const TcPath& path) {
  Eigen::VectorXd out(path.t_values.size());
  for (Index i = 0; i < out.size(); ++i) out[i] = model1_price_closed_form(p, path, i);
  return out;
}

double model2_logprice_closed_form(const Model2Params& p, const TcPath& path, Index i) {
  return model2_logprice(p, path.time_to_singularity(i));
}

Eigen::VectorXd model2_logprice_closed_form(const Model2Params& p, const TcPath& path) {
  Eigen::VectorXd out(path.t_values.size());
  for (Index i = 0; i < out.size(); ++i) out[i] = model2_logprice_closed_form(p, path, i);
  return out;
}

Model1Path simulate_model1_sde(const Model1Params& p, const OuParams& ou, const WienerIncrements& noise,
                               const SdeOptions& opts) {
  if (!(p.mu > 0.0) || !(p.m >= 1.0) || !(p.p0 > 0.0)) {
    throw Error(Errc::invalid_parameter, "model-1 simulation needs mu > 0, m >= 1, p0 > 0");
  }
  const Index n = noise.steps();
  Model1Path out{time_grid(noise.dt, n), Eigen::VectorXd(n + 1), simulate_ou(ou, noise), -1};

  const double mu = p.mu;
  const double m = p.m;
  const double sigma = ou.noise_scale * mu;
  const double dt = noise.dt;
  const double guard = opts.overflow_factor * p.p0;
  const Eigen::VectorXd& tc = out.critical.values;

  out.price[0] = p.p0;
  for (Index k = 0; k < n; ++k) {
    const double price = out.price[k];
    const double pm = std::pow(price, m);
    double delta = 0.0;
    if (opts.regulator) delta = ou.alpha * tc[k] + 0.5 * m * sigma * sigma / mu * std::pow(price, m - 1.0);
    const double next = price + mu * pm * (1.0 + delta) * dt - sigma * pm * noise.dW[k];
    if (!(next > 0.0) || !(next <= guard)) {
      if (!opts.truncate_on_blowup) {
        throw Error(Errc::blowup, "model-1 price left (0, guard] at step " + std::to_string(k + 1), k + 1);
      }
      out.halted_at = k + 1;
      out.t_values.conservativeResize(k + 1);
      out.price.conservativeResize(k + 1);
      out.critical.t_values.conservativeResize(k + 1);
      out.critical.values.conservativeResize(k + 1);
      return out;
    }
    out.price[k + 1] = next;
  }
  return out;
}

Model1Path simulate_model1_sde(const Model1Params& p, const OuParams& ou, double dt, Index n_steps,
                               std::uint64_t seed, const SdeOptions& opts) {
  return simulate_model1_sde(p, ou, draw_increments(dt, n_steps, seed), opts);
}

Model2Path simulate_model2_sde(const Model2Params& p, const OuParams& ou, const WienerIncrements& noise,
                               const SdeOptions& opts) {
  validate(p);
  const Index n = noise.steps();
  Model2Path out{time_grid(noise.dt, n), Eigen::VectorXd(n + 1), Eigen::VectorXd(n + 1), simulate_ou(ou, noise), -1};

  const double mu = p.mu;
  const double m = p.m;
  const double sigma = ou.noise_scale * mu;
  const double dt = noise.dt;
  const double guard = opts.overflow_factor * p.x0;
  const Eigen::VectorXd& tc = out.critical.values;

  out.momentum[0] = p.x0;
  out.log_price[0] = p.A - p.B() * std::pow(p.critical_time(), 1.0 - p.beta());
  for (Index k = 0; k < n; ++k) {
    const double x = out.momentum[k];
    const double xm1 = std::pow(x, m - 1.0);
    const double xm = xm1 * x;
    double gamma = 0.0;
    double delta = 0.0;
    if (opts.regulator) {
      gamma = ou.alpha * tc[k] + sigma * sigma / (2.0 * mu) * xm1;
      delta = ou.alpha * tc[k] + 0.5 * m * sigma * sigma / mu * xm1;
    }
    const double y_next = out.log_price[k] + x * (1.0 + gamma) * dt - sigma / mu * x * noise.dW[k];
    const double x_next = x + mu * xm * (1.0 + delta) * dt - sigma * xm * noise.dW[k];
    if (!(x_next > 0.0) || !(x_next <= guard) || !std::isfinite(y_next)) {
      if (!opts.truncate_on_blowup) {
        throw Error(Errc::blowup, "model-2 momentum left (0, guard] at step " + std::to_string(k + 1), k + 1);
      }
      out.halted_at = k + 1;
      out.t_values.conservativeResize(k + 1);
      out.log_price.conservativeResize(k + 1);
      out.momentum.conservativeResize(k + 1);
      out.critical.t_values.conservativeResize(k + 1);
      out.critical.values.conservativeResize(k + 1);
      return out;
    }
    out.log_price[k + 1] = y_next;
    out.momentum[k + 1] = x_next;
  }
  return out;
}

Model2Path simulate_model2_sde(const Model2Params& p, const OuParams& ou, double dt, Index n_steps,
                               std::uint64_t seed, const SdeOptions& opts) {
  return simulate_model2_sde(p, ou, draw_increments(dt, n_steps, seed), opts);
}

}  // namespace fts
