#include "fts/timeseries.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdio>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "fts/error.hpp"

namespace fts {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

bool iequals(std::string_view a, std::string_view b) {
  return a.size() == b.size() &&
         std::equal(a.begin(), a.end(), b.begin(), [](char x, char y) {
           return std::tolower(static_cast<unsigned char>(x)) == std::tolower(static_cast<unsigned char>(y));
         });
}

bool parse_int(std::string_view s, int& out) {
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc{} && ptr == s.data() + s.size();
}

}  // namespace

bool parse_iso_date(std::string_view text, Date& out) {
  text = trim(text);
  if (text.size() != 10 || text[4] != '-' || text[7] != '-') return false;
  int y = 0, m = 0, d = 0;
  if (!parse_int(text.substr(0, 4), y) || !parse_int(text.substr(5, 2), m) || !parse_int(text.substr(8, 2), d)) {
    return false;
  }
  Date date{std::chrono::year{y}, std::chrono::month{static_cast<unsigned>(m)},
            std::chrono::day{static_cast<unsigned>(d)}};
  if (!date.ok()) return false;
  out = date;
  return true;
}

std::string format_iso_date(const Date& date) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%04d-%02u-%02u", static_cast<int>(date.year()),
                static_cast<unsigned>(date.month()), static_cast<unsigned>(date.day()));
  return buf;
}

Date add_weekdays(const Date& date, std::int64_t n) {
  using std::chrono::days;
  using std::chrono::sys_days;
  sys_days d{date};
  const int dir = n >= 0 ? 1 : -1;
  for (std::int64_t k = 0; k != n; k += dir) {
    do {
      d += days{dir};
    } while (std::chrono::weekday{d} == std::chrono::Saturday || std::chrono::weekday{d} == std::chrono::Sunday);
  }
  return Date{d};
}

PriceSeries::PriceSeries(std::vector<Date> dates, Eigen::VectorXd closes, std::string symbol)
    : dates_(std::move(dates)), closes_(std::move(closes)), symbol_(std::move(symbol)) {
  if (static_cast<Index>(dates_.size()) != closes_.size()) {
    throw Error(Errc::invalid_parameter, "dates and closes differ in length");
  }
  if (closes_.size() < 2) throw Error(Errc::empty_input, "a price series needs at least two rows");
  for (Index i = 0; i < closes_.size(); ++i) {
    if (!(closes_[i] > 0.0) || !std::isfinite(closes_[i])) {
      throw Error(Errc::non_positive_price, "close at row " + std::to_string(i) + " is not positive", i);
    }
    if (i > 0 && !(dates_[i - 1] < dates_[i])) {
      throw Error(Errc::duplicate_date, "dates not strictly increasing at " + format_iso_date(dates_[i]), i);
    }
  }
}

Index PriceSeries::lower_bound(const Date& date) const {
  return std::lower_bound(dates_.begin(), dates_.end(), date) - dates_.begin();
}

PriceSeries PriceSeries::slice(Index first, Index last) const {
  if (first < 0 || last >= size() || last < first) {
    throw Error(Errc::window_out_of_range, "slice out of range");
  }
  std::vector<Date> d(dates_.begin() + first, dates_.begin() + last + 1);
  return PriceSeries(std::move(d), closes_.segment(first, last - first + 1), symbol_);
}

PriceWindow::PriceWindow(const PriceSeries& parent, Index end_index, Index length)
    : parent_(&parent), end_index_(end_index), length_(length) {
  if (length < 1 || end_index < 0 || end_index >= parent.size() || end_index - length + 1 < 0) {
    throw Error(Errc::window_out_of_range, "window of length " + std::to_string(length) + " ending at index " +
                                               std::to_string(end_index) + " does not fit a series of length " +
                                               std::to_string(parent.size()));
  }
}

Eigen::VectorXd PriceWindow::t_values() const {
  return Eigen::VectorXd::LinSpaced(length_, 0.0, static_cast<double>(length_ - 1));
}

PriceSeries parse_price_csv(std::string_view text, std::string symbol) {
  struct Row {
    Date date;
    double close;
    std::int64_t line;
  };
  std::vector<Row> rows;
  bool have_header = false;
  std::int64_t line_no = 0;

  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = trim(text.substr(0, nl));
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    if (line.empty()) continue;
    if (line_no == 1 && line.size() >= 3 && line.substr(0, 3) == "\xEF\xBB\xBF") line = trim(line.substr(3));

    const auto comma = line.find(',');
    if (comma == std::string_view::npos || line.find(',', comma + 1) != std::string_view::npos) {
      throw Error(Errc::malformed_row, "expected two fields on line " + std::to_string(line_no), line_no);
    }
    const auto first = trim(line.substr(0, comma));
    const auto second = trim(line.substr(comma + 1));

    if (!have_header) {
      if (!iequals(first, "date") || !iequals(second, "close")) {
        throw Error(Errc::malformed_row, "header must be `date,close`", line_no);
      }
      have_header = true;
      continue;
    }

    Row row{};
    row.line = line_no;
    if (!parse_iso_date(first, row.date)) {
      throw Error(Errc::malformed_row, "bad date on line " + std::to_string(line_no), line_no);
    }
    auto [ptr, ec] = std::from_chars(second.data(), second.data() + second.size(), row.close);
    if (second.empty() || ec != std::errc{} || ptr != second.data() + second.size() || !std::isfinite(row.close)) {
      throw Error(Errc::malformed_row, "bad close on line " + std::to_string(line_no), line_no);
    }
    if (!(row.close > 0.0)) {
      throw Error(Errc::non_positive_price, "non-positive close on line " + std::to_string(line_no), line_no);
    }
    rows.push_back(row);
  }

  if (rows.empty()) throw Error(Errc::empty_input, "no data rows");

  std::stable_sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) { return a.date < b.date; });
  for (std::size_t i = 1; i < rows.size(); ++i) {
    if (rows[i].date == rows[i - 1].date) {
      throw Error(Errc::duplicate_date, "duplicate date " + format_iso_date(rows[i].date), rows[i].line);
    }
  }
  if (rows.size() < 2) throw Error(Errc::empty_input, "a price series needs at least two rows");

  std::vector<Date> dates;
  dates.reserve(rows.size());
  Eigen::VectorXd closes(static_cast<Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    dates.push_back(rows[i].date);
    closes[static_cast<Index>(i)] = rows[i].close;
  }
  return PriceSeries(std::move(dates), std::move(closes), std::move(symbol));
}

PriceSeries read_price_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::io_error, "cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  auto name = path.substr(path.find_last_of('/') + 1);
  return parse_price_csv(buf.str(), name.substr(0, name.find_last_of('.')));
}

std::string to_csv(const PriceSeries& series) {
  std::string out = "date,close\n";
  char num[64];
  for (Index i = 0; i < series.size(); ++i) {
    out += format_iso_date(series.dates()[static_cast<std::size_t>(i)]);
    out += ',';
    auto res = std::to_chars(num, num + sizeof(num), series.closes()[i]);
    out.append(num, res.ptr);
    out += '\n';
  }
  return out;
}

PriceWindow slice_window(const PriceSeries& series, Index end_index, Index length) {
  return PriceWindow(series, end_index, length);
}

std::vector<Index> window_ends(Index series_length, Index length, Index step) {
  if (length < 1 || step < 1) throw Error(Errc::invalid_parameter, "window length and step must be positive");
  std::vector<Index> ends;
  for (Index e = length - 1; e < series_length; e += step) ends.push_back(e);
  return ends;
}

}  // namespace fts
