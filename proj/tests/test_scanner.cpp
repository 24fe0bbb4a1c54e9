#include <cmath>
#include <sstream>
#include <string>

#include "fts/scanner.hpp"
#include "test_support.hpp"

namespace fts {
namespace {

using testing::throws_code;

const CriticalValueTable& shipped() {
  static const CriticalValueTable table = load_critical_value_table(default_critical_value_table_path());
  return table;
}

AlarmRecord alarm_at(Index end_index, int level = 750, Model model = Model::price) {
  AlarmRecord a;
  a.window_end_index = end_index;
  a.window_end = add_weekdays(std::chrono::year{2000} / 1 / 3, end_index);
  a.model = model;
  a.level = level;
  return a;
}

TEST(ClassifyModel1, Thresholds) {
  EXPECT_EQ(classify_model1(200, 0.6), 250);
  EXPECT_EQ(classify_model1(600, 0.6), 750);
  EXPECT_EQ(classify_model1(400, 0.6), 500);
  EXPECT_EQ(classify_model1(0, 0.6), 250);
  EXPECT_FALSE(classify_model1(800, 0.6).has_value());
  EXPECT_FALSE(classify_model1(750, 0.6).has_value());
  EXPECT_FALSE(classify_model1(200, 0.0).has_value());
  EXPECT_FALSE(classify_model1(200, -0.5).has_value());
  EXPECT_FALSE(classify_model1(-1, 0.6).has_value());
}

TEST(ClassifyModel2, Thresholds) {
  EXPECT_EQ(classify_model2(10, 3.2), 3);
  EXPECT_EQ(classify_model2(10, 2.3), 1);
  EXPECT_EQ(classify_model2(10, 2.7), 2);
  EXPECT_EQ(classify_model2(-25, 2.7), 2);
  EXPECT_EQ(classify_model2(50, 2.7), 2);
  EXPECT_FALSE(classify_model2(60, 4).has_value());
  EXPECT_FALSE(classify_model2(-26, 4).has_value());
  EXPECT_FALSE(classify_model2(10, 2.0).has_value());
}

TEST(Classify, LevelsNest) {
  // A tighter level always implies every looser one.
  for (double h = -30; h <= 800; h += 7.5) {
    const auto level = classify_model1(h, 0.5);
    if (level) {
      EXPECT_LT(h, *level);
      for (int looser : {250, 500, 750}) {
        if (looser >= *level) { EXPECT_LT(h, looser); }
      }
    }
  }
  for (double m = 1.5; m <= 5; m += 0.05) {
    const auto level = classify_model2(0, m);
    if (level) { EXPECT_GT(m, 2.0 + 0.5 * (*level - 1)); }
  }
  EXPECT_EQ(severity(Model::price, 250), 3);
  EXPECT_EQ(severity(Model::price, 750), 1);
  EXPECT_EQ(severity(Model::momentum, 2), 2);
}

TEST(ClusterAlarms, GapArithmetic) {
  const auto clusters =
      cluster_alarms({alarm_at(0, 750), alarm_at(25, 250), alarm_at(50, 500), alarm_at(500, 500)}, 50);
  ASSERT_EQ(clusters.size(), 2u);
  EXPECT_EQ(clusters[0].members.size(), 3u);
  EXPECT_EQ(clusters[0].start, alarm_at(0).window_end);
  EXPECT_EQ(clusters[0].end, alarm_at(50).window_end);
  EXPECT_EQ(clusters[0].peak_level, 250);
  EXPECT_EQ(clusters[1].members.size(), 1u);
  EXPECT_EQ(clusters[1].peak_level, 500);
  EXPECT_TRUE(cluster_alarms({}, 50).empty());
  EXPECT_EQ(cluster_alarms({alarm_at(0), alarm_at(51)}, 50).size(), 2u);
}

TEST(AlarmJson, RoundTrip) {
  AlarmRecord a = alarm_at(812, 500);
  a.t_c_date = add_weekdays(a.window_end, 321);
  a.horizon_days = 321;
  a.m = 2.75;
  a.beta = 1.0 / 1.75;
  const nlohmann::ordered_json j = to_json(a);
  EXPECT_EQ(j["window_end"], format_iso_date(a.window_end));
  EXPECT_EQ(j["model"], "fts-price");
  EXPECT_EQ(j["horizon_days"], 321);
  EXPECT_EQ(j["level"], 500);
  const AlarmRecord b = alarm_from_json(nlohmann::json::parse(j.dump()));
  EXPECT_EQ(b.window_end, a.window_end);
  EXPECT_EQ(b.window_end_index, a.window_end_index);
  EXPECT_EQ(b.t_c_date, a.t_c_date);
  EXPECT_EQ(b.horizon_days, a.horizon_days);
  EXPECT_EQ(b.m, a.m);
  EXPECT_EQ(b.beta, a.beta);
  EXPECT_EQ(b.level, a.level);
  EXPECT_TRUE(throws_code([] { alarm_from_json(nlohmann::json::parse(R"({"model":"fts-price"})")); }, Errc::io_error));
}

TEST(DateAfter, ContinuesOnWeekdaysPastTheSeries) {
  const PriceSeries s = testing::series_from_log_prices(Eigen::VectorXd::Zero(10));
  EXPECT_EQ(date_after(s, 3, 2), s.dates()[5]);
  EXPECT_EQ(date_after(s, 9, 1), add_weekdays(s.dates()[9], 1));
  EXPECT_EQ(date_after(s, 5, 20), add_weekdays(s.dates()[9], 16));
  EXPECT_EQ(date_after(s, 5, -2), s.dates()[3]);
}

// 1000 days of a price-model bubble whose critical time sits 150 days past
// the end of the series.
PriceSeries bubble_series() {
  return testing::series_from_log_prices(testing::model1_log_prices(1000, 1150.0, 2.5, 0.2, 6.0, 2024));
}

TEST(Scan, FlatSeriesHasNoAlarms) {
  const PriceSeries flat = testing::series_from_log_prices(Eigen::VectorXd::Constant(850, std::log(50.0)));
  ScanConfig cfg;
  cfg.table = shipped();
  EXPECT_TRUE(scan(flat, cfg).empty());
}

TEST(Scan, TooShortSeries) {
  const PriceSeries s = testing::series_from_log_prices(Eigen::VectorXd::Zero(700));
  ScanConfig cfg;
  cfg.table = shipped();
  EXPECT_TRUE(throws_code([&] { scan(s, cfg); }, Errc::series_too_short));
}

TEST(Scan, BubbleRaisesAlarmsOrderedAndDeterministic) {
  const PriceSeries s = bubble_series();
  ScanConfig cfg;
  cfg.table = shipped();
  const std::vector<WindowFit> serial = scan_windows(s, cfg);
  ASSERT_EQ(serial.size(), 11u);
  for (std::size_t k = 0; k < serial.size(); ++k) EXPECT_EQ(serial[k].end_index, 749 + 25 * static_cast<Index>(k));

  cfg.jobs = 4;
  const std::vector<WindowFit> parallel = scan_windows(s, cfg);
  ASSERT_EQ(parallel.size(), serial.size());
  for (std::size_t k = 0; k < serial.size(); ++k) {
    EXPECT_EQ(parallel[k].end_index, serial[k].end_index);
    ASSERT_EQ(parallel[k].alarm.has_value(), serial[k].alarm.has_value());
    if (serial[k].alarm) { EXPECT_EQ(to_json(*parallel[k].alarm).dump(), to_json(*serial[k].alarm).dump()); }
  }

  const std::vector<AlarmRecord> alarms = scan(s, cfg);
  EXPECT_GE(alarms.size(), 8u);
  for (const AlarmRecord& a : alarms) {
    EXPECT_EQ(a.model, Model::price);
    EXPECT_GE(a.horizon_days, 0);
    EXPECT_LT(a.horizon_days, a.level);
    EXPECT_EQ(a.t_c_date, date_after(s, a.window_end_index, a.horizon_days));
  }
}

TEST(Scan, PrefixConsistency) {
  const PriceSeries s = bubble_series();
  ScanConfig cfg;
  cfg.table = shipped();
  cfg.jobs = 4;
  const std::vector<AlarmRecord> full = scan(s, cfg);
  const PriceSeries prefix = s.slice(0, 899);
  const std::vector<AlarmRecord> part = scan(prefix, cfg);
  std::vector<AlarmRecord> expected;
  for (const AlarmRecord& a : full) {
    if (a.window_end_index <= 899) expected.push_back(a);
  }
  ASSERT_EQ(part.size(), expected.size());
  for (std::size_t k = 0; k < part.size(); ++k) {
    EXPECT_EQ(part[k].window_end_index, expected[k].window_end_index);
    EXPECT_EQ(part[k].horizon_days, expected[k].horizon_days);
    EXPECT_EQ(part[k].m, expected[k].m);
    EXPECT_EQ(part[k].level, expected[k].level);
  }
}

TEST(PlotData, OneRowPerDayWithAlarmLevels) {
  const PriceSeries s = testing::series_from_log_prices(Eigen::VectorXd::LinSpaced(5, 0.0, 0.4));
  AlarmRecord a = alarm_at(3, 250);
  a.window_end = s.dates()[3];
  const std::string csv = plot_data_csv(s, {a});
  std::istringstream in(csv);
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "date,log_price,alarm_level");
  int rows = 0;
  std::string last_level;
  while (std::getline(in, line)) {
    ++rows;
    last_level = line.substr(line.rfind(',') + 1);
    if (rows == 4) { EXPECT_EQ(last_level, "250"); }
  }
  EXPECT_EQ(rows, 5);
  EXPECT_EQ(last_level, "0");
}

}  // namespace
}  // namespace fts
