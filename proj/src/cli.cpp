#include "fts/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "fts/agents.hpp"
#include "fts/calibrate.hpp"
#include "fts/models.hpp"
#include "fts/scanner.hpp"
#include "fts/timeseries.hpp"
#include "fts/unitroot.hpp"

namespace fts::cli {

namespace {

using nlohmann::ordered_json;

const std::vector<std::string> kModelNames{"fts-price", "fts-momentum", "model1", "model2"};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::io_error, "cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_output(const std::string& path, const std::string& text, std::ostream& out) {
  if (path.empty() || path == "-") {
    out << text;
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error(Errc::io_error, "cannot write " + path);
  f << text;
  if (!f) throw Error(Errc::io_error, "write failed for " + path);
}

std::string dump(const ordered_json& j) { return j.dump(2) + "\n"; }

// Every option of the subcommand with its effective value, in declaration order.
ordered_json config_of(const CLI::App& sub) {
  ordered_json j = ordered_json::object();
  for (const CLI::Option* opt : sub.get_options()) {
    if (opt->get_lnames().empty()) continue;
    const std::string& name = opt->get_lnames().front();
    if (name == "help" || name == "config") continue;
    if (opt->get_expected_max() == 0) {
      j[name] = opt->count() > 0;
    } else if (opt->count() > 0) {
      const auto& r = opt->results();
      if (r.size() == 1) {
        j[name] = r.front();
      } else {
        j[name] = r;
      }
    } else {
      j[name] = opt->get_default_str();
    }
  }
  return j;
}

ordered_json meta(const CLI::App& sub, std::optional<std::uint64_t> seed) {
  ordered_json j;
  j["tool_version"] = FTS_VERSION;
  j["subcommand"] = sub.get_name();
  j["seed"] = seed ? ordered_json(*seed) : ordered_json(nullptr);
  j["config"] = config_of(sub);
  return j;
}

struct SeriesSource {
  std::string input;
  std::string url;
  std::string from;
  std::string to;
  int timeout = 30;
};

void add_source_options(CLI::App* sub, SeriesSource& src) {
  auto* in = sub->add_option("--input", src.input, "CSV file with date,close rows");
  auto* url = sub->add_option("--url", src.url, "HTTP(S) URL serving the same CSV");
  in->excludes(url);
  sub->add_option("--from", src.from, "First date kept (YYYY-MM-DD)");
  sub->add_option("--to", src.to, "Last date kept (YYYY-MM-DD)");
  sub->add_option("--timeout", src.timeout, "Fetch timeout in seconds")->check(CLI::PositiveNumber);
}

Date parse_date_flag(const std::string& text, const char* flag) {
  Date d;
  if (!parse_iso_date(text, d)) throw Error(Errc::usage_error, std::string(flag) + " expects YYYY-MM-DD, got " + text);
  return d;
}

PriceSeries load_series(const SeriesSource& src) {
  if (src.input.empty() == src.url.empty()) throw Error(Errc::usage_error, "exactly one of --input or --url is required");
  PriceSeries series = src.input.empty()
                           ? parse_price_csv(fetch_prices(src.url, std::chrono::seconds{src.timeout}), "url")
                           : read_price_csv(src.input);
  if (src.from.empty() && src.to.empty()) return series;
  const Index first = src.from.empty() ? 0 : series.lower_bound(parse_date_flag(src.from, "--from"));
  Index last = series.size() - 1;
  if (!src.to.empty()) {
    const Date to = parse_date_flag(src.to, "--to");
    last = series.lower_bound(to);
    if (last >= series.size() || series.dates()[static_cast<std::size_t>(last)] != to) --last;
  }
  if (first > last || last - first + 1 < 2) throw Error(Errc::empty_input, "date filter leaves fewer than 2 rows");
  return series.slice(first, last);
}

ordered_json series_json(const PriceSeries& s) {
  return {{"symbol", s.symbol()},
          {"first_date", format_iso_date(s.dates().front())},
          {"last_date", format_iso_date(s.dates().back())},
          {"rows", s.size()}};
}

void add_grid_options(CLI::App* sub, GridSpec& g) {
  sub->add_option("--n-beta", g.n_beta, "Exponent grid size")->check(CLI::PositiveNumber);
  sub->add_option("--n-scale", g.n_scale, "Scale grid size (c1 or B)")->check(CLI::PositiveNumber);
  sub->add_option("--n-a", g.n_A, "A grid size (momentum model)")->check(CLI::PositiveNumber);
  sub->add_option("--beta-max", g.beta_max, "Upper end of the price-model exponent grid")->check(CLI::PositiveNumber);
  sub->add_option("--lead-min", g.lead_min, "Smallest mean critical-time lead, trading days")
      ->check(CLI::PositiveNumber);
  sub->add_option("--lead-max", g.lead_max, "Largest mean critical-time lead, trading days")
      ->check(CLI::PositiveNumber);
  sub->add_option("--elite", g.elite_size, "Elite list size")->check(CLI::PositiveNumber);
  sub->add_option("--max-variance-ratio", g.max_variance_ratio,
                  "Admit points with residual variance below this multiple of var(t); 0 disables");
  sub->add_option("--a-offset-min", g.a_offset_min, "Smallest A - max ln p on the log-spaced A grid; 0 for linear");
  sub->add_flag("!--mean-leads-only", g.pointwise_leads, "Bound only the mean lead, not every lead in the window");
  sub->add_flag("!--no-refine-lead", g.refine_lead, "Use only grid leads, without the per-shape variance optimum");
  sub->add_flag("!--all-leads", g.profile_scale, "Rank every admissible lead, not one per shape");
}

CriticalValueTable load_table(const std::string& path) {
  return load_critical_value_table(path.empty() ? default_critical_value_table_path() : path);
}

ordered_json point_json(const SearchPoint& point) {
  ordered_json j;
  if (const auto* p = std::get_if<Model1SearchPoint>(&point)) {
    j["c1"] = p->c1;
  } else {
    const auto& q = std::get<Model2SearchPoint>(point);
    j["A"] = q.A;
    j["B"] = q.B;
  }
  j["beta"] = beta_of(point);
  j["m"] = feedback_exponent(point);
  j["mu"] = mu_of(point);
  return j;
}

ordered_json candidate_json(const Candidate& c) {
  ordered_json j = point_json(c.point);
  j["t_stat"] = c.df.t_stat;
  j["rho_hat"] = c.df.rho_hat;
  j["variance"] = c.variance;
  j["T_c_hat"] = c.T_c_hat;
  j["grid_index"] = c.grid_index;
  return j;
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

// --- subcommands -----------------------------------------------------------

struct ScanArgs {
  std::string model = "fts-price";
  SeriesSource source;
  Index window = 0;
  Index step = 25;
  GridSpec grid;
  std::string table;
  std::string out = "-";
  std::string plot_data;
  unsigned jobs = 1;
};

void run_scan(const CLI::App& sub, const ScanArgs& a, std::ostream& out) {
  ScanConfig cfg;
  cfg.model = parse_model(a.model);
  cfg.window_length = a.window > 0 ? a.window : default_window_length(cfg.model);
  cfg.step = a.step;
  cfg.grid = a.grid;
  cfg.table = load_table(a.table);
  cfg.jobs = a.jobs;
  const PriceSeries series = load_series(a.source);
  const std::vector<WindowFit> fits = scan_windows(series, cfg);

  std::vector<AlarmRecord> alarms;
  for (const WindowFit& f : fits) {
    if (f.alarm) alarms.push_back(*f.alarm);
  }
  ordered_json j = meta(sub, std::nullopt);
  j["series"] = series_json(series);
  j["window_length"] = cfg.window_length;
  j["step"] = cfg.step;
  j["critical_value"] = cfg.table.at(cfg.window_length);
  j["windows_scanned"] = fits.size();
  j["alarms"] = ordered_json::array();
  for (const AlarmRecord& alarm : alarms) j["alarms"].push_back(to_json(alarm));
  write_output(a.out, dump(j), out);
  if (!a.plot_data.empty()) write_output(a.plot_data, plot_data_csv(series, alarms), out);
}

struct CalibrateArgs {
  std::string model = "fts-price";
  SeriesSource source;
  std::string end;
  Index window = 0;
  GridSpec grid;
  std::string table;
  std::string out = "-";
  std::string transform_out;
};

void run_calibrate(const CLI::App& sub, const CalibrateArgs& a, std::ostream& out) {
  const Model model = parse_model(a.model);
  const Index length = a.window > 0 ? a.window : default_window_length(model);
  const CriticalValueTable table = load_table(a.table);
  const PriceSeries series = load_series(a.source);
  Index end_index = series.size() - 1;
  if (!a.end.empty()) {
    const Date end = parse_date_flag(a.end, "--end");
    end_index = series.lower_bound(end);
    if (end_index >= series.size() || series.dates()[static_cast<std::size_t>(end_index)] != end) --end_index;
  }
  if (end_index < length - 1) {
    throw Error(Errc::series_too_short, "not enough history before the window end for " + std::to_string(length) +
                                            " days");
  }
  const PriceWindow window(series, end_index, length);
  const CalibrationResult r = grid_search(window, model, a.grid, table, length);

  ordered_json j = meta(sub, std::nullopt);
  j["series"] = series_json(series);
  j["model"] = to_string(model);
  j["window_start"] = format_iso_date(series.dates()[static_cast<std::size_t>(window.start_index())]);
  j["window_end"] = format_iso_date(window.end_date());
  j["window_length"] = length;
  j["critical_value"] = r.critical_value;
  j["grid_points"] = r.n_points;
  j["rejecting_points"] = r.n_rejecting;
  j["skipped_points"] = r.n_skipped;
  j["elite"] = ordered_json::array();
  for (const Candidate& c : r.elite) j["elite"].push_back(candidate_json(c));
  if (r.best) {
    ordered_json best = candidate_json(*r.best);
    const auto days = static_cast<std::int64_t>(std::llround(r.horizon()));
    best["horizon_days"] = days;
    best["t_c_date"] = format_iso_date(date_after(series, end_index, days));
    j["best"] = best;
    const std::optional<AlarmRecord> alarm = make_alarm(series, end_index, r);
    j["alarm"] = alarm ? ordered_json(to_json(*alarm)) : ordered_json(nullptr);
    if (!a.transform_out.empty()) {
      const CriticalTimePath path = transform(window, r.best->point);
      std::string csv = "t,T_tilde,residual\n";
      for (Index i = 0; i < path.t_values.size(); ++i) {
        csv += fmt(path.t_values[i]) + "," + fmt(path.T_tilde[i]) + "," + fmt(path.residual[i]) + "\n";
      }
      write_output(a.transform_out, csv, out);
    }
  } else {
    j["best"] = nullptr;
    j["alarm"] = nullptr;
  }
  write_output(a.out, dump(j), out);
}

struct SimulateArgs {
  std::string model = "fts-price";
  double mu = std::numeric_limits<double>::quiet_NaN();
  double m = std::numeric_limits<double>::quiet_NaN();
  double p0 = 1.0;
  double A = 0.0;
  double x0 = 0.1;
  double alpha = 0.1;
  double noise_scale = 1.0;
  double tc0 = 0.0;
  double dt = 0.01;
  Index steps = 9000;
  Index every = 1;
  std::uint64_t seed = 1;
  bool closed_form = false;
  bool truncate = false;
  std::string out = "-";
  std::string meta_path;
};

void run_simulate(const CLI::App& sub, SimulateArgs a, std::ostream& out) {
  const Model model = parse_model(a.model);
  // Defaults put the deterministic critical time at t = 100.
  if (std::isnan(a.mu)) a.mu = model == Model::price ? 0.01 : 0.5;
  if (std::isnan(a.m)) a.m = model == Model::price ? 2.0 : 3.0;
  const OuParams ou{a.alpha, a.noise_scale, a.tc0};
  validate(ou);
  SdeOptions opts;
  opts.truncate_on_blowup = a.truncate;

  std::string csv;
  ordered_json params;
  Index halted_at = -1;
  Index rows = 0;
  if (model == Model::price) {
    const Model1Params p{a.mu, a.m, a.p0};
    validate(p);
    params = {{"mu", p.mu}, {"m", p.m}, {"p0", p.p0}, {"beta", p.beta()}, {"K", p.K()}, {"T_c", p.critical_time()}};
    const Model1Path path = simulate_model1_sde(p, ou, a.dt, a.steps, a.seed, opts);
    halted_at = path.halted_at;
    const TcPath tc = model1_tc_path(p, path.critical);
    const Eigen::VectorXd price = a.closed_form ? model1_price_closed_form(p, tc) : path.price;
    csv = "t,price,tc\n";
    for (Index i = 0; i < path.t_values.size(); i += a.every, ++rows) {
      csv += fmt(path.t_values[i]) + "," + fmt(price[i]) + "," + fmt(tc.critical_time(i)) + "\n";
    }
  } else {
    const Model2Params p{a.mu, a.m, a.A, a.x0};
    validate(p);
    params = {{"mu", p.mu}, {"m", p.m},         {"A", p.A}, {"x0", p.x0}, {"beta", p.beta()},
              {"B", p.B()}, {"T_c", p.critical_time()}};
    const Model2Path path = simulate_model2_sde(p, ou, a.dt, a.steps, a.seed, opts);
    halted_at = path.halted_at;
    const TcPath tc = model2_tc_path(p, path.critical);
    const Eigen::VectorXd log_price = a.closed_form ? model2_logprice_closed_form(p, tc) : path.log_price;
    csv = "t,price,momentum,tc\n";
    for (Index i = 0; i < path.t_values.size(); i += a.every, ++rows) {
      const double x = a.closed_form ? model2_momentum(p, tc.time_to_singularity(i)) : path.momentum[i];
      csv += fmt(path.t_values[i]) + "," + fmt(std::exp(log_price[i])) + "," + fmt(x) + "," +
             fmt(tc.critical_time(i)) + "\n";
    }
  }
  write_output(a.out, csv, out);

  std::string meta_path = a.meta_path;
  if (meta_path.empty() && a.out != "-" && !a.out.empty()) meta_path = a.out + ".json";
  if (!meta_path.empty()) {
    ordered_json j = meta(sub, a.seed);
    j["model"] = to_string(model);
    j["params"] = params;
    j["ou"] = {{"alpha", ou.alpha}, {"noise_scale", ou.noise_scale}, {"t0_value", ou.t0_value}};
    j["rows"] = rows;
    j["halted_at"] = halted_at;
    write_output(meta_path, dump(j), out);
  }
}

struct CriticalArgs {
  std::vector<Index> lengths{750, 900};
  double level = 0.005;
  Index reps = 100000;
  std::uint64_t seed = 20240607;
  unsigned jobs = 1;
  std::string out = "-";
};

void run_critical(const CLI::App& sub, const CriticalArgs& a, std::ostream& out) {
  const CriticalValueTable table = build_critical_value_table(a.lengths, a.level, a.reps, a.seed, a.jobs);
  ordered_json j = meta(sub, a.seed);
  const ordered_json body = ordered_json::parse(to_json(table));
  for (const auto& [key, value] : body.items()) j[key] = value;
  if (a.lengths.size() == 1) {
    j["length"] = a.lengths.front();
    j["critical_value"] = table.at(a.lengths.front());
  }
  write_output(a.out, dump(j), out);
}

struct ExitArgs {
  std::string beliefs;
  std::string out = "-";
  unsigned jobs = 1;
};

void run_exit_times(const ExitArgs& a, std::ostream& out) {
  const Population pop = population_from_json(read_file(a.beliefs));
  write_output(a.out, exit_times_csv(pop, solve_population(pop, a.jobs)), out);
}

struct ReportArgs {
  std::string alarms;
  std::string format = "text";
  Index max_gap = 50;
  std::string out = "-";
};

std::string level_label(const AlarmRecord& a) {
  return a.model == Model::price ? "horizon<" + std::to_string(a.level) : "level " + std::to_string(a.level);
}

void run_report(const CLI::App& sub, const ReportArgs& a, std::ostream& out) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(read_file(a.alarms));
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::io_error, std::string("bad alarms file: ") + e.what());
  }
  const nlohmann::json& list = doc.is_array() ? doc : doc.at("alarms");
  std::vector<AlarmRecord> alarms;
  for (const auto& item : list) alarms.push_back(alarm_from_json(item));
  std::stable_sort(alarms.begin(), alarms.end(), [](const AlarmRecord& x, const AlarmRecord& y) {
    return x.window_end_index < y.window_end_index;
  });
  const std::vector<AlarmCluster> clusters = cluster_alarms(alarms, a.max_gap);

  std::string text;
  if (a.format == "text") {
    if (clusters.empty()) text = "no alarm clusters\n";
    for (std::size_t k = 0; k < clusters.size(); ++k) {
      const AlarmCluster& c = clusters[k];
      AlarmRecord peak = c.members.front();
      peak.level = c.peak_level;
      text += to_string(peak.model) + std::string(" cluster ") + std::to_string(k + 1) + ": " +
              format_iso_date(c.start) + " to " + format_iso_date(c.end) + ", " + std::to_string(c.members.size()) +
              (c.members.size() == 1 ? " alarm" : " alarms") + ", peak " + level_label(peak) + "\n";
    }
  } else if (a.format == "csv") {
    text = "cluster,model,start,end,alarms,peak_level,mean_m\n";
    for (std::size_t k = 0; k < clusters.size(); ++k) {
      const AlarmCluster& c = clusters[k];
      double mean_m = 0.0;
      for (const AlarmRecord& r : c.members) mean_m += r.m;
      mean_m /= static_cast<double>(c.members.size());
      text += std::to_string(k + 1) + "," + to_string(c.members.front().model) + "," + format_iso_date(c.start) + "," +
              format_iso_date(c.end) + "," + std::to_string(c.members.size()) + "," + std::to_string(c.peak_level) +
              "," + fmt(mean_m) + "\n";
    }
  } else {
    ordered_json j = meta(sub, std::nullopt);
    j["clusters"] = ordered_json::array();
    for (const AlarmCluster& c : clusters) {
      ordered_json members = ordered_json::array();
      for (const AlarmRecord& r : c.members) members.push_back(to_json(r));
      j["clusters"].push_back({{"model", to_string(c.members.front().model)},
                               {"start", format_iso_date(c.start)},
                               {"end", format_iso_date(c.end)},
                               {"alarms", c.members.size()},
                               {"peak_level", c.peak_level},
                               {"members", members}});
    }
    text = dump(j);
  }
  write_output(a.out, text, out);
}

void add_config(CLI::App* sub) {
  sub->add_option("--config", "key = value file; explicit flags take precedence");
}

// Fills options not given on the command line from the --config file. Keys
// are long option names, optionally under a [subcommand] section.
void apply_config(CLI::App& sub) {
  const CLI::Option* config = sub.get_option("--config");
  if (config->count() == 0) return;
  const std::string path = config->as<std::string>();
  if (!std::ifstream(path)) throw Error(Errc::io_error, "cannot read config file " + path);
  for (const CLI::ConfigItem& item : CLI::ConfigINI().from_file(path)) {
    if (item.name == "++" || item.name == "--") continue;
    if (!item.parents.empty() && item.parents != std::vector<std::string>{sub.get_name()}) {
      throw Error(Errc::usage_error, "config section [" + item.parents.front() + "] does not match " + sub.get_name());
    }
    CLI::Option* opt = sub.get_option_no_throw("--" + item.name);
    if (opt == nullptr || item.name == "help" || item.name == "config") {
      throw Error(Errc::usage_error, "unknown config key " + item.name);
    }
    if (opt->count() > 0) continue;
    opt->add_result(item.inputs);
    opt->run_callback();
  }
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Finite-time-singularity bubble diagnostics", "fts"};
  app.require_subcommand(1);
  app.set_version_flag("--version", FTS_VERSION);
  app.option_defaults()->always_capture_default();

  ScanArgs scan_args;
  auto* scan_cmd = app.add_subcommand("scan", "Slide calibration windows over a series and emit alarms");
  scan_cmd->add_option("--model", scan_args.model, "fts-price or fts-momentum")->check(CLI::IsMember(kModelNames));
  add_source_options(scan_cmd, scan_args.source);
  scan_cmd->add_option("--window", scan_args.window, "Window length (default 750 or 900 by model)")
      ->check(CLI::NonNegativeNumber);
  scan_cmd->add_option("--step", scan_args.step, "Window step in trading days")->check(CLI::PositiveNumber);
  add_grid_options(scan_cmd, scan_args.grid);
  scan_cmd->add_option("--table", scan_args.table, "Critical-value table JSON (default: shipped table)");
  scan_cmd->add_option("--out", scan_args.out, "Alarm JSON path, - for stdout");
  scan_cmd->add_option("--plot-data", scan_args.plot_data, "Also write date,log_price,alarm_level CSV");
  scan_cmd->add_option("--jobs", scan_args.jobs, "Worker threads")->check(CLI::PositiveNumber);
  add_config(scan_cmd);

  SimulateArgs sim_args;
  auto* sim_cmd = app.add_subcommand("simulate", "Simulate a bubble path with its critical-time noise");
  sim_cmd->add_option("--model", sim_args.model, "fts-price or fts-momentum")->check(CLI::IsMember(kModelNames));
  sim_cmd->add_option("--mu", sim_args.mu, "Feedback strength (default 0.01 price, 0.5 momentum)");
  sim_cmd->add_option("--m", sim_args.m, "Feedback exponent (default 2 price, 3 momentum)");
  sim_cmd->add_option("--p0", sim_args.p0, "Initial price (price model)");
  sim_cmd->add_option("--A", sim_args.A, "Log-price at the singularity (momentum model)");
  sim_cmd->add_option("--x0", sim_args.x0, "Initial momentum (momentum model)");
  sim_cmd->add_option("--alpha", sim_args.alpha, "Mean reversion of the critical-time noise");
  sim_cmd->add_option("--noise-scale", sim_args.noise_scale, "Diffusion of the critical-time noise, sigma/mu");
  sim_cmd->add_option("--tc0", sim_args.tc0, "Initial critical-time deviation");
  sim_cmd->add_option("--dt", sim_args.dt, "Time step")->check(CLI::PositiveNumber);
  sim_cmd->add_option("--steps", sim_args.steps, "Number of steps")->check(CLI::PositiveNumber);
  sim_cmd->add_option("--every", sim_args.every, "Write every k-th row")->check(CLI::PositiveNumber);
  sim_cmd->add_option("--seed", sim_args.seed, "Random seed");
  sim_cmd->add_flag("--closed-form", sim_args.closed_form, "Price from the closed form instead of the SDE");
  sim_cmd->add_flag("--truncate", sim_args.truncate, "Stop at blow-up instead of failing");
  sim_cmd->add_option("--out", sim_args.out, "CSV path, - for stdout");
  sim_cmd->add_option("--meta", sim_args.meta_path, "JSON sidecar path (default: <out>.json)");
  add_config(sim_cmd);

  CalibrateArgs cal_args;
  auto* cal_cmd = app.add_subcommand("calibrate", "Calibrate one window ending at a date");
  cal_cmd->add_option("--model", cal_args.model, "fts-price or fts-momentum")->check(CLI::IsMember(kModelNames));
  add_source_options(cal_cmd, cal_args.source);
  cal_cmd->add_option("--end", cal_args.end, "Window end date (default: last row)");
  cal_cmd->add_option("--window", cal_args.window, "Window length (default 750 or 900 by model)")
      ->check(CLI::NonNegativeNumber);
  add_grid_options(cal_cmd, cal_args.grid);
  cal_cmd->add_option("--table", cal_args.table, "Critical-value table JSON (default: shipped table)");
  cal_cmd->add_option("--out", cal_args.out, "JSON path, - for stdout");
  cal_cmd->add_option("--transform-out", cal_args.transform_out, "Also write t,T_tilde,residual CSV for the best point");
  add_config(cal_cmd);

  CriticalArgs crit_args;
  auto* crit_cmd = app.add_subcommand("critical-values", "Monte Carlo Dickey-Fuller critical values");
  crit_cmd->add_option("--length,--lengths", crit_args.lengths, "Series lengths")->delimiter(',');
  crit_cmd->add_option("--level", crit_args.level, "Lower-tail significance level");
  crit_cmd->add_option("--reps", crit_args.reps, "Random-walk replications");
  crit_cmd->add_option("--seed", crit_args.seed, "Random seed");
  crit_cmd->add_option("--jobs", crit_args.jobs, "Worker threads")->check(CLI::PositiveNumber);
  crit_cmd->add_option("--out", crit_args.out, "JSON path, - for stdout");
  add_config(crit_cmd);

  ExitArgs exit_args;
  auto* exit_cmd = app.add_subcommand("exit-times", "Solve arbitrageur exit times for a belief population");
  exit_cmd->add_option("--beliefs", exit_args.beliefs, "Belief population JSON")->required();
  exit_cmd->add_option("--out", exit_args.out, "CSV path, - for stdout");
  exit_cmd->add_option("--jobs", exit_args.jobs, "Worker threads")->check(CLI::PositiveNumber);
  add_config(exit_cmd);

  ReportArgs rep_args;
  auto* rep_cmd = app.add_subcommand("report", "Summarise alarm clusters");
  rep_cmd->add_option("--alarms", rep_args.alarms, "Alarm JSON written by scan")->required();
  rep_cmd->add_option("--format", rep_args.format, "text, json or csv")
      ->check(CLI::IsMember({"text", "json", "csv"}));
  rep_cmd->add_option("--max-gap", rep_args.max_gap, "Largest gap inside a cluster, trading days")
      ->check(CLI::NonNegativeNumber);
  rep_cmd->add_option("--out", rep_args.out, "Output path, - for stdout");
  add_config(rep_cmd);

  auto help_target = [&]() -> const CLI::App* {
    for (const CLI::App* sub : app.get_subcommands()) return sub;
    return &app;
  };

  try {
    std::vector<const char*> argv{"fts"};
    for (const std::string& a : args) argv.push_back(a.c_str());
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << help_target()->help();
    return kSuccess;
  } catch (const CLI::CallForVersion&) {
    out << FTS_VERSION << "\n";
    return kSuccess;
  } catch (const CLI::ParseError& e) {
    err << "error: UsageError: " << e.what() << "\n" << help_target()->help();
    return kInputError;
  }

  try {
    for (CLI::App* sub : app.get_subcommands()) apply_config(*sub);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kInputError;
  } catch (const CLI::ParseError& e) {
    err << "error: UsageError: " << e.what() << "\n";
    return kInputError;
  }

  try {
    if (scan_cmd->parsed()) run_scan(*scan_cmd, scan_args, out);
    if (sim_cmd->parsed()) run_simulate(*sim_cmd, sim_args, out);
    if (cal_cmd->parsed()) run_calibrate(*cal_cmd, cal_args, out);
    if (crit_cmd->parsed()) run_critical(*crit_cmd, crit_args, out);
    if (exit_cmd->parsed()) run_exit_times(exit_args, out);
    if (rep_cmd->parsed()) run_report(*rep_cmd, rep_args, out);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    if (e.code() == Errc::usage_error) err << help_target()->help();
    return kInputError;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    return kInternalError;
  }
  return kSuccess;
}

}  // namespace fts::cli
