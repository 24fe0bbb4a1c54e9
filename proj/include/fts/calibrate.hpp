#pragma once

#include <optional>
#include <string_view>
#include <variant>
#include <vector>

#include <Eigen/Core>

#include "fts/timeseries.hpp"
#include "fts/transform.hpp"
#include "fts/unitroot.hpp"

namespace fts {

enum class Model {
  price,     // finite-time singularity in the price, "fts-price"
  momentum,  // finite-time singularity in the momentum, "fts-momentum"
};

const char* to_string(Model model) noexcept;
/// Accepts `fts-price`/`model1` and `fts-momentum`/`model2`.
Model parse_model(std::string_view name);
Index default_window_length(Model model);

/// Search grids. The scale parameter (c1 for the price model, B for the
/// momentum model) is not gridded directly: for every exponent (and A) it is
/// chosen so that the window mean of T~_c(t) - t, the "lead", runs over a
/// log-spaced grid on [lead_min, lead_max] trading days. That keeps every
/// grid point inside the range of critical times the alarms care about
/// whatever the price level.
struct GridSpec {
  Index n_beta = 64;
  Index n_scale = 64;
  Index n_A = 32;
  double beta_max = 2.0;  // price model: beta on (0, beta_max]; momentum model: (0, 1)
  double lead_min = 1.0;
  double lead_max = 3000.0;
  Index elite_size = 10;
  /// Also require every T~_c(t) - t in the window, not just the mean, to lie
  /// in [lead_min, lead_max].
  bool pointwise_leads = true;
  /// Admit only points whose residual variance is below this multiple of
  /// var(t), the residual of the zero-amplitude transform T~_c(t) = t.
  /// Non-positive disables the check.
  double max_variance_ratio = 0.5;
  /// Smallest offset A - max ln p of the momentum model's A grid; offsets are
  /// log-spaced from here to the upper bound. Non-positive selects a linear
  /// grid.
  double a_offset_min = 1e-3;
  /// Also evaluate, per shape, the lead minimising the residual variance, so
  /// the fitted critical time is not quantised to the lead grid.
  bool refine_lead = true;
  /// Keep one point per shape (exponent, and A): its admissible rejecting
  /// lead with the smallest residual variance. The elite then ranks shapes.
  bool profile_scale = true;
};

void validate(const GridSpec& grid);
Eigen::VectorXd beta_grid(const GridSpec& grid, Model model);
Eigen::VectorXd lead_grid(const GridSpec& grid);
/// Grid on (max_log_price, max_log_price + span], span = max_log_price when
/// positive, else 1; see GridSpec::a_offset_min for the spacing.
Eigen::VectorXd a_grid(const GridSpec& grid, double max_log_price);

using SearchPoint = std::variant<Model1SearchPoint, Model2SearchPoint>;

double beta_of(const SearchPoint& point);
double feedback_exponent(const SearchPoint& point);
double mu_of(const SearchPoint& point);

CriticalTimePath transform(const PriceWindow& window, const SearchPoint& point);

struct Candidate {
  SearchPoint point;
  DfResult df;
  double variance = 0.0;  // population variance of the residual t~_c series
  double T_c_hat = 0.0;   // window-relative
  Index grid_index = 0;
};

struct CalibrationResult {
  Model model = Model::price;
  Index window_length = 0;
  double critical_value = 0.0;
  std::vector<Candidate> elite;  // ascending t statistic
  std::optional<Candidate> best;  // minimum residual variance within elite
  Index n_points = 0;
  Index n_rejecting = 0;
  Index n_skipped = 0;

  /// Estimated critical time minus the window's last day, trading days.
  double horizon() const { return best->T_c_hat - static_cast<double>(window_length - 1); }
};

/// Exhaustive search: transform, split, Dickey-Fuller on every grid point;
/// keep rejecting points, take the `elite_size` smallest t statistics, and
/// pick the member with the smallest residual variance. `expected_length`
/// of 0 skips the window-length check.
CalibrationResult grid_search(const PriceWindow& window, Model model, const GridSpec& grid,
                              const CriticalValueTable& table, Index expected_length = 0);

/// Ascending t statistic, then smaller variance, then grid order; truncated.
std::vector<Candidate> rank_elite(std::vector<Candidate> candidates, Index size = 10);

}  // namespace fts
