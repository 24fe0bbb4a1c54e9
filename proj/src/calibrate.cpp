#include "fts/calibrate.hpp"

#include <algorithm>
#include <cmath>

namespace fts {

namespace {

// Second moments of the residual r(s) = s a + b, where a is the centred,
// unit-mean shape of the transformed prices and b = t - mean(t). Every
// Dickey-Fuller quantity is a quadratic in s, so one pass over the window
// serves the whole lead grid.
struct ShapeMoments {
  double saa = 0, sab = 0, sbb = 0;              // lagged level products
  double sa_da = 0, sa_db = 0, sb_da = 0, sb_db = 0;  // lagged level x difference
  double sdada = 0, sdadb = 0, sdbdb = 0;        // difference products
  double vaa = 0, vab = 0, vbb = 0;              // full-sample, divided by length
};

ShapeMoments moments(const Eigen::ArrayXd& a, const Eigen::ArrayXd& b) {
  ShapeMoments s;
  const Index n = a.size();
  for (Index i = 0; i + 1 < n; ++i) {
    const double la = a[i], lb = b[i];
    const double da = a[i + 1] - a[i], db = b[i + 1] - b[i];
    s.saa += la * la;
    s.sab += la * lb;
    s.sbb += lb * lb;
    s.sa_da += la * da;
    s.sa_db += la * db;
    s.sb_da += lb * da;
    s.sb_db += lb * db;
    s.sdada += da * da;
    s.sdadb += da * db;
    s.sdbdb += db * db;
  }
  const double inv_n = 1.0 / static_cast<double>(n);
  s.vaa = a.square().sum() * inv_n;
  s.vab = (a * b).sum() * inv_n;
  s.vbb = b.square().sum() * inv_n;
  return s;
}

struct FastStat {
  double t_stat;
  double variance;
  bool ok;
};

FastStat evaluate(const ShapeMoments& m, double s, Index n_obs) {
  const double sxx = s * s * m.saa + 2.0 * s * m.sab + m.sbb;
  const double sxy = s * s * m.sa_da + s * (m.sa_db + m.sb_da) + m.sb_db;
  const double syy = s * s * m.sdada + 2.0 * s * m.sdadb + m.sdbdb;
  const double variance = s * s * m.vaa + 2.0 * s * m.vab + m.vbb;
  if (!(sxx > 0.0)) return {0.0, variance, false};
  const double rho = sxy / sxx;
  const double ssr = syy - rho * sxy;
  // Below this the closed-form SSR is cancellation noise; the exact path
  // would report the point as degenerate anyway.
  if (!(ssr > 1e-10 * syy)) return {0.0, variance, false};
  const double t = rho / std::sqrt(ssr / static_cast<double>(n_obs - 1) / sxx);
  return {t, variance, std::isfinite(t)};
}

struct Shape {
  Eigen::ArrayXd a;     // u - 1 with mean(u) = 1
  double log_mean = 0;  // log of the window mean of the untransformed power
  double u_min = 1, u_max = 1;
};

// u(t) proportional to exp(z(t)), normalised to unit mean.
Shape make_shape(const Eigen::ArrayXd& z) {
  const double zmax = z.maxCoeff();
  const Eigen::ArrayXd w = (z - zmax).exp();
  const double wmean = w.mean();
  const Eigen::ArrayXd u = w / wmean;
  return {u - 1.0, zmax + std::log(wmean), u.minCoeff(), u.maxCoeff()};
}

struct Screened {
  double t_stat;
  double variance;
  Index grid_index;
  SearchPoint point;
};

bool screened_less(const Screened& x, const Screened& y) {
  if (x.t_stat != y.t_stat) return x.t_stat < y.t_stat;
  if (x.variance != y.variance) return x.variance < y.variance;
  return x.grid_index < y.grid_index;
}

bool candidate_less(const Candidate& x, const Candidate& y) {
  if (x.df.t_stat != y.df.t_stat) return x.df.t_stat < y.df.t_stat;
  if (x.variance != y.variance) return x.variance < y.variance;
  return x.grid_index < y.grid_index;
}

}  // namespace

const char* to_string(Model model) noexcept { return model == Model::price ? "fts-price" : "fts-momentum"; }

Model parse_model(std::string_view name) {
  if (name == "fts-price" || name == "model1") return Model::price;
  if (name == "fts-momentum" || name == "model2") return Model::momentum;
  throw Error(Errc::usage_error, "unknown model `" + std::string(name) + "` (expected fts-price or fts-momentum)");
}

Index default_window_length(Model model) { return model == Model::price ? 750 : 900; }

void validate(const GridSpec& grid) {
  if (grid.n_beta < 1 || grid.n_scale < 1 || grid.n_A < 1 || grid.elite_size < 1) {
    throw Error(Errc::invalid_parameter, "grid sizes must be positive");
  }
  if (!(grid.beta_max > 0.0) || !(grid.lead_min > 0.0) || !(grid.lead_max >= grid.lead_min)) {
    throw Error(Errc::invalid_parameter, "grid bounds must satisfy beta_max > 0 and 0 < lead_min <= lead_max");
  }
}

Eigen::VectorXd beta_grid(const GridSpec& grid, Model model) {
  const Index n = grid.n_beta;
  Eigen::VectorXd out(n);
  for (Index k = 0; k < n; ++k) {
    out[k] = model == Model::price ? grid.beta_max * static_cast<double>(k + 1) / static_cast<double>(n)
                                   : static_cast<double>(k + 1) / static_cast<double>(n + 1);
  }
  return out;
}

Eigen::VectorXd lead_grid(const GridSpec& grid) {
  const Index n = grid.n_scale;
  if (n == 1) return Eigen::VectorXd::Constant(1, std::sqrt(grid.lead_min * grid.lead_max));
  return Eigen::VectorXd::LinSpaced(n, std::log(grid.lead_min), std::log(grid.lead_max)).array().exp();
}

Eigen::VectorXd a_grid(const GridSpec& grid, double max_log_price) {
  const double span = max_log_price > 0.0 ? max_log_price : 1.0;
  Eigen::VectorXd out(grid.n_A);
  if (grid.a_offset_min <= 0.0 || grid.n_A == 1) {
    for (Index j = 0; j < grid.n_A; ++j) {
      out[j] = max_log_price + span * static_cast<double>(j + 1) / static_cast<double>(grid.n_A);
    }
    return out;
  }
  const double lo = std::log(std::min(grid.a_offset_min, span));
  const double hi = std::log(span);
  for (Index j = 0; j < grid.n_A; ++j) {
    out[j] = max_log_price + std::exp(lo + (hi - lo) * static_cast<double>(j) / static_cast<double>(grid.n_A - 1));
  }
  return out;
}

double beta_of(const SearchPoint& point) {
  return std::visit([](const auto& p) { return p.beta; }, point);
}

double feedback_exponent(const SearchPoint& point) {
  return std::visit([](const auto& p) { return p.m(); }, point);
}

double mu_of(const SearchPoint& point) {
  return std::visit([](const auto& p) { return p.mu(); }, point);
}

CriticalTimePath transform(const PriceWindow& window, const SearchPoint& point) {
  if (const auto* p1 = std::get_if<Model1SearchPoint>(&point)) return invert_model1(window, *p1);
  return invert_model2(window, std::get<Model2SearchPoint>(point));
}

std::vector<Candidate> rank_elite(std::vector<Candidate> candidates, Index size) {
  std::stable_sort(candidates.begin(), candidates.end(), candidate_less);
  if (static_cast<Index>(candidates.size()) > size) candidates.resize(static_cast<std::size_t>(size));
  return candidates;
}

CalibrationResult grid_search(const PriceWindow& window, Model model, const GridSpec& grid,
                              const CriticalValueTable& table, Index expected_length) {
  validate(grid);
  const Index n = window.length();
  if (expected_length > 0 && n != expected_length) {
    throw Error(Errc::window_length_mismatch, "window has " + std::to_string(n) + " days, expected " +
                                                  std::to_string(expected_length));
  }

  CalibrationResult result;
  result.model = model;
  result.window_length = n;
  result.critical_value = table.at(n);

  const Eigen::ArrayXd log_p = window.prices().array().log();
  const Eigen::ArrayXd t = window.t_values().array();
  const Eigen::ArrayXd b = t - t.mean();
  const double ramp_variance = b.square().mean();
  const Eigen::VectorXd betas = beta_grid(grid, model);
  const Eigen::VectorXd leads = lead_grid(grid);
  const Eigen::ArrayXd log_leads = leads.array().log();
  const double max_log_p = log_p.maxCoeff();
  const Eigen::VectorXd a_values = model == Model::price ? Eigen::VectorXd::Zero(1) : a_grid(grid, max_log_p);

  std::vector<Screened> screened;
  Index grid_index = 0;
  for (Index ib = 0; ib < betas.size(); ++ib) {
    const double beta = betas[ib];
    for (Index ia = 0; ia < a_values.size(); ++ia) {
      Shape shape;
      double exponent = 1.0;
      if (model == Model::price) {
        shape = make_shape(-log_p / beta);
      } else {
        const Eigen::ArrayXd gap = a_values[ia] - log_p;
        if ((gap <= 0.0).any()) {
          const Index slots = leads.size() + (grid.refine_lead ? 1 : 0);
          result.n_points += slots;
          result.n_skipped += slots;
          grid_index += slots;
          continue;
        }
        exponent = 1.0 / (1.0 - beta);
        shape = make_shape(exponent * gap.log());
      }
      const ShapeMoments mom = moments(shape.a, b);
      // Slot n_scale holds the variance-minimising lead -vab/vaa.
      const Index slots = leads.size() + (grid.refine_lead ? 1 : 0);
      std::optional<Screened> shape_best;
      for (Index is = 0; is < slots; ++is, ++grid_index) {
        double lead = 0.0;
        double log_lead = 0.0;
        if (is < leads.size()) {
          lead = leads[is];
          log_lead = log_leads[is];
        } else {
          lead = mom.vaa > 0.0 ? -mom.vab / mom.vaa : 0.0;
          if (!(lead > 0.0) || !std::isfinite(lead)) continue;
          log_lead = std::log(lead);
        }
        ++result.n_points;
        if (grid.pointwise_leads && (lead * shape.u_min < grid.lead_min || lead * shape.u_max > grid.lead_max)) {
          ++result.n_skipped;
          continue;
        }
        if (!grid.pointwise_leads && (lead < grid.lead_min || lead > grid.lead_max)) {
          ++result.n_skipped;
          continue;
        }
        const FastStat stat = evaluate(mom, lead, n - 1);
        if (!stat.ok) {
          ++result.n_skipped;
          continue;
        }
        if (!(stat.t_stat < result.critical_value)) continue;
        if (grid.max_variance_ratio > 0.0 && !(stat.variance < grid.max_variance_ratio * mom.vbb)) continue;
        ++result.n_rejecting;
        SearchPoint point;
        if (model == Model::price) {
          point = Model1SearchPoint{std::exp(log_lead - shape.log_mean), beta};
        } else {
          point = Model2SearchPoint{a_values[ia], std::exp((shape.log_mean - log_lead) / exponent), beta};
        }
        Screened entry{stat.t_stat, stat.variance, grid_index, point};
        if (!grid.profile_scale) {
          screened.push_back(std::move(entry));
        } else if (!shape_best || entry.variance < shape_best->variance) {
          shape_best = std::move(entry);
        }
      }
      if (shape_best) screened.push_back(std::move(*shape_best));
    }
  }

  // Confirm the leading screened points on the materialised transform; the
  // elite carries the exact statistics.
  std::sort(screened.begin(), screened.end(), screened_less);
  std::vector<Candidate> verified;
  for (const Screened& s : screened) {
    if (static_cast<Index>(verified.size()) >= grid.elite_size) break;
    CriticalTimePath path;
    try {
      path = transform(window, s.point);
    } catch (const Error& e) {
      if (e.code() == Errc::domain_violation || e.code() == Errc::invalid_search_point) continue;
      throw;
    }
    const DfResult df = reject_unit_root(path.residual, table);
    if (!df.reject) continue;
    const double variance = path.residual.squaredNorm() / static_cast<double>(n);
    if (grid.max_variance_ratio > 0.0 && !(variance < grid.max_variance_ratio * ramp_variance)) continue;
    verified.push_back({s.point, df, variance, path.T_c_hat, s.grid_index});
  }

  result.elite = rank_elite(std::move(verified), grid.elite_size);
  if (!result.elite.empty()) {
    const auto it = std::min_element(result.elite.begin(), result.elite.end(),
                                     [](const Candidate& x, const Candidate& y) { return x.variance < y.variance; });
    result.best = *it;
  }
  return result;
}

}  // namespace fts
