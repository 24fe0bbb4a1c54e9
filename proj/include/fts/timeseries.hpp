#pragma once

#include <chrono>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

namespace fts {

using Index = Eigen::Index;
using Date = std::chrono::year_month_day;

/// Parses `YYYY-MM-DD`; returns false on anything else (including invalid
/// calendar dates such as 2001-02-29).
bool parse_iso_date(std::string_view text, Date& out);
std::string format_iso_date(const Date& date);

/// Advances `date` by `n` weekdays (n may be negative). Used to place
/// estimated critical times that fall beyond the last observed trading day.
Date add_weekdays(const Date& date, std::int64_t n);

/// Dated daily closes. Immutable after construction; the constructor enforces
/// strictly increasing dates, strictly positive closes and at least two rows.
class PriceSeries {
 public:
  PriceSeries(std::vector<Date> dates, Eigen::VectorXd closes, std::string symbol = {});

  Index size() const { return closes_.size(); }
  const std::vector<Date>& dates() const { return dates_; }
  const Eigen::VectorXd& closes() const { return closes_; }
  const std::string& symbol() const { return symbol_; }

  /// Index of the first trading day on or after `date`, or size() if none.
  Index lower_bound(const Date& date) const;
  /// Sub-series over [first, last] inclusive.
  PriceSeries slice(Index first, Index last) const;

 private:
  std::vector<Date> dates_;
  Eigen::VectorXd closes_;
  std::string symbol_;
};

/// A run of `length` consecutive trading days ending at `end_index`. Holds a
/// pointer to its parent; the parent must outlive the window.
class PriceWindow {
 public:
  PriceWindow(const PriceSeries& parent, Index end_index, Index length);

  const PriceSeries& parent() const { return *parent_; }
  Index end_index() const { return end_index_; }
  Index start_index() const { return end_index_ - length_ + 1; }
  Index length() const { return length_; }
  const Date& end_date() const { return parent_->dates()[static_cast<std::size_t>(end_index_)]; }

  auto prices() const { return parent_->closes().segment(start_index(), length_); }
  /// Within-window trading-day offsets 0..length-1.
  Eigen::VectorXd t_values() const;

 private:
  const PriceSeries* parent_;
  Index end_index_;
  Index length_;
};

/// Reads `date,close` CSV text. Rows may arrive in any order; the result is
/// sorted by date. Throws MalformedRow, NonPositivePrice, DuplicateDate or
/// EmptyInput.
PriceSeries parse_price_csv(std::string_view text, std::string symbol = {});
PriceSeries read_price_csv(const std::string& path);

/// Inverse of parse_price_csv; closes are printed in shortest round-trip form.
std::string to_csv(const PriceSeries& series);

/// HTTP(S) GET returning the body unmodified. Throws NetworkError,
/// HttpStatus(code) or Timeout.
std::string fetch_prices(const std::string& url, std::chrono::seconds timeout = std::chrono::seconds{30});

PriceWindow slice_window(const PriceSeries& series, Index end_index, Index length);

/// End indices length-1, length-1+step, ... not exceeding series_length-1.
/// Empty when the series is shorter than one window.
std::vector<Index> window_ends(Index series_length, Index length, Index step);

}  // namespace fts
