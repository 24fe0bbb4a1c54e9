#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "fts/calibrate.hpp"
#include "fts/timeseries.hpp"
#include "fts/unitroot.hpp"

namespace fts {

/// One window whose best calibration satisfies the alarm criteria.
/// `level` is a horizon threshold (750, 500, 250) for the price model and an
/// exponent tier (1, 2, 3) for the momentum model.
struct AlarmRecord {
  Date window_end;
  Index window_end_index = 0;
  Model model = Model::price;
  Date t_c_date;
  std::int64_t horizon_days = 0;  // estimated critical time minus window end, trading days
  double m = 0.0;
  double beta = 0.0;
  int level = 0;
};

/// 1 (weakest) to 3 (strongest) for either model.
int severity(Model model, int level);

struct AlarmCluster {
  std::vector<AlarmRecord> members;
  Date start;
  Date end;
  int peak_level = 0;  // level of the most severe member
};

/// Tightest satisfied threshold among 750/500/250; needs beta > 0 and horizon >= 0.
std::optional<int> classify_model1(double horizon, double beta);
/// Highest satisfied tier among m > 2, 2.5, 3; needs -25 <= horizon <= 50.
std::optional<int> classify_model2(double horizon, double m);

/// Greedy chaining on window end indices: an alarm joins the open cluster
/// when it ends at most `max_gap` trading days after the previous member.
std::vector<AlarmCluster> cluster_alarms(const std::vector<AlarmRecord>& alarms, Index max_gap = 50);

struct ScanConfig {
  Model model = Model::price;
  Index window_length = 0;  // 0 selects the model default (750 or 900)
  Index step = 25;
  GridSpec grid;
  CriticalValueTable table;
  unsigned jobs = 1;
};

/// Calibration outcome of one window of a scan.
struct WindowFit {
  Index end_index = 0;
  CalibrationResult result;
  std::optional<AlarmRecord> alarm;
};

/// Calibrates every window ending at length-1, length-1+step, ...; results
/// are ordered by window end whatever `jobs` is.
std::vector<WindowFit> scan_windows(const PriceSeries& series, const ScanConfig& config);
std::vector<AlarmRecord> scan(const PriceSeries& series, const ScanConfig& config);

/// Date `trading_days` after series index `index`; beyond the last row the
/// calendar continues on weekdays.
Date date_after(const PriceSeries& series, Index index, std::int64_t trading_days);

/// Alarm for a calibrated window, if the best point meets the model's criteria.
std::optional<AlarmRecord> make_alarm(const PriceSeries& series, Index end_index, const CalibrationResult& result);

nlohmann::ordered_json to_json(const AlarmRecord& alarm);
AlarmRecord alarm_from_json(const nlohmann::json& j);

/// `date,log_price,alarm_level`, one row per trading day; alarm_level is the
/// level of the alarm whose window ends that day, else 0.
std::string plot_data_csv(const PriceSeries& series, const std::vector<AlarmRecord>& alarms);

}  // namespace fts
