#include "fts/scanner.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <mutex>
#include <thread>

namespace fts {

int severity(Model model, int level) {
  if (model == Model::momentum) return level;
  switch (level) {
    case 750: return 1;
    case 500: return 2;
    case 250: return 3;
    default: return 0;
  }
}

std::optional<int> classify_model1(double horizon, double beta) {
  if (!(beta > 0.0) || !(horizon >= 0.0)) return std::nullopt;
  if (horizon < 250.0) return 250;
  if (horizon < 500.0) return 500;
  if (horizon < 750.0) return 750;
  return std::nullopt;
}

std::optional<int> classify_model2(double horizon, double m) {
  if (!(horizon >= -25.0 && horizon <= 50.0)) return std::nullopt;
  if (m > 3.0) return 3;
  if (m > 2.5) return 2;
  if (m > 2.0) return 1;
  return std::nullopt;
}

std::vector<AlarmCluster> cluster_alarms(const std::vector<AlarmRecord>& alarms, Index max_gap) {
  std::vector<AlarmCluster> clusters;
  for (const AlarmRecord& a : alarms) {
    if (clusters.empty() || a.window_end_index - clusters.back().members.back().window_end_index > max_gap) {
      clusters.push_back({{}, a.window_end, a.window_end, a.level});
    }
    AlarmCluster& c = clusters.back();
    c.members.push_back(a);
    c.end = a.window_end;
    if (severity(a.model, a.level) > severity(c.members.front().model, c.peak_level)) c.peak_level = a.level;
  }
  return clusters;
}

Date date_after(const PriceSeries& series, Index index, std::int64_t trading_days) {
  const std::int64_t target = index + trading_days;
  const std::int64_t last = series.size() - 1;
  if (target > last) return add_weekdays(series.dates().back(), target - last);
  return series.dates()[static_cast<std::size_t>(std::max<std::int64_t>(target, 0))];
}

std::optional<AlarmRecord> make_alarm(const PriceSeries& series, Index end_index, const CalibrationResult& result) {
  if (!result.best) return std::nullopt;
  const SearchPoint& point = result.best->point;
  const double horizon = result.horizon();
  if (!std::isfinite(horizon)) return std::nullopt;
  const auto days = static_cast<std::int64_t>(std::llround(horizon));
  const double h = static_cast<double>(days);
  const double beta = beta_of(point);
  const double m = feedback_exponent(point);
  const std::optional<int> level = result.model == Model::price ? classify_model1(h, beta) : classify_model2(h, m);
  if (!level) return std::nullopt;

  AlarmRecord alarm;
  alarm.window_end_index = end_index;
  alarm.window_end = series.dates()[static_cast<std::size_t>(end_index)];
  alarm.model = result.model;
  alarm.horizon_days = days;
  alarm.m = m;
  alarm.beta = beta;
  alarm.level = *level;
  alarm.t_c_date = date_after(series, end_index, days);
  return alarm;
}

std::vector<WindowFit> scan_windows(const PriceSeries& series, const ScanConfig& config) {
  const Index length = config.window_length > 0 ? config.window_length : default_window_length(config.model);
  if (config.step < 1) throw Error(Errc::invalid_parameter, "step must be positive");
  if (series.size() < length) {
    throw Error(Errc::series_too_short, "series has " + std::to_string(series.size()) + " days, window needs " +
                                            std::to_string(length));
  }
  validate(config.grid);
  config.table.at(length);  // fail before any work if the table lacks this length

  const std::vector<Index> ends = window_ends(series.size(), length, config.step);
  std::vector<WindowFit> fits(ends.size());
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;

  auto work = [&] {
    for (std::size_t k = next++; k < ends.size(); k = next++) {
      try {
        const PriceWindow window(series, ends[k], length);
        WindowFit fit;
        fit.end_index = ends[k];
        fit.result = grid_search(window, config.model, config.grid, config.table, length);
        fit.alarm = make_alarm(series, ends[k], fit.result);
        fits[k] = std::move(fit);
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next = ends.size();
      }
    }
  };

  const unsigned workers = std::max(1u, std::min<unsigned>(config.jobs, static_cast<unsigned>(ends.size())));
  if (workers == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& th : pool) th.join();
  }
  if (failure) std::rethrow_exception(failure);
  return fits;
}

std::vector<AlarmRecord> scan(const PriceSeries& series, const ScanConfig& config) {
  std::vector<AlarmRecord> alarms;
  for (const WindowFit& fit : scan_windows(series, config)) {
    if (fit.alarm) alarms.push_back(*fit.alarm);
  }
  return alarms;
}

nlohmann::ordered_json to_json(const AlarmRecord& alarm) {
  return {{"window_end", format_iso_date(alarm.window_end)},
          {"model", to_string(alarm.model)},
          {"t_c_date", format_iso_date(alarm.t_c_date)},
          {"horizon_days", alarm.horizon_days},
          {"m", alarm.m},
          {"beta", alarm.beta},
          {"level", alarm.level},
          {"window_end_index", alarm.window_end_index}};
}

AlarmRecord alarm_from_json(const nlohmann::json& j) {
  AlarmRecord a;
  try {
    if (!parse_iso_date(j.at("window_end").get<std::string>(), a.window_end) ||
        !parse_iso_date(j.at("t_c_date").get<std::string>(), a.t_c_date)) {
      throw Error(Errc::io_error, "bad date in alarm record");
    }
    a.model = parse_model(j.at("model").get<std::string>());
    a.horizon_days = j.at("horizon_days").get<std::int64_t>();
    a.m = j.at("m").get<double>();
    a.beta = j.at("beta").get<double>();
    a.level = j.at("level").get<int>();
    a.window_end_index = j.value("window_end_index", Index{0});
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::io_error, std::string("bad alarm record: ") + e.what());
  }
  return a;
}

std::string plot_data_csv(const PriceSeries& series, const std::vector<AlarmRecord>& alarms) {
  std::vector<int> level(static_cast<std::size_t>(series.size()), 0);
  for (const AlarmRecord& a : alarms) {
    if (a.window_end_index >= 0 && a.window_end_index < series.size()) {
      level[static_cast<std::size_t>(a.window_end_index)] = a.level;
    }
  }
  std::string out = "date,log_price,alarm_level\n";
  char buf[64];
  for (Index i = 0; i < series.size(); ++i) {
    std::snprintf(buf, sizeof buf, ",%.10g,%d\n", std::log(series.closes()[i]), level[static_cast<std::size_t>(i)]);
    out += format_iso_date(series.dates()[static_cast<std::size_t>(i)]);
    out += buf;
  }
  return out;
}

}  // namespace fts
