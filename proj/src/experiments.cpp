#include "trendlab/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <limits>
#include <map>
#include <mutex>
#include <ostream>
#include <thread>
#include <tuple>

#include "trendlab/error.hpp"
#include "trendlab/text.hpp"

namespace trendlab {

namespace {
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
}

std::string_view to_string(RegimeLabel label) {
  switch (label) {
    case RegimeLabel::bull: return "bull";
    case RegimeLabel::bear: return "bear";
    case RegimeLabel::flat: break;
  }
  return "flat";
}

double regime_slope(const PriceSeries& segment) {
  if (segment.size() < 8)
    throw DataError("segment too short to classify (" + std::to_string(segment.size()) +
                    " bars, need 8)");
  const auto adj = segment.adjusted();
  const auto [lo, hi] = std::minmax_element(adj.begin(), adj.end());
  if (!(*hi > *lo)) return 0.0;
  const NormalizationScale scale(*lo, *hi);
  const double n = static_cast<double>(adj.size());
  const double t_mean = (n - 1.0) / 2.0;
  double y_mean = 0.0;
  for (double p : adj) y_mean += normalize(p, scale);
  y_mean /= n;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t t = 0; t < adj.size(); ++t) {
    const double dt = static_cast<double>(t) - t_mean;
    sxy += dt * (normalize(adj[t], scale) - y_mean);
    sxx += dt * dt;
  }
  return sxy / sxx * (n - 1.0);
}

RegimeLabel classify_regime(const PriceSeries& segment, double threshold) {
  const double change = regime_slope(segment);
  if (change > threshold) return RegimeLabel::bull;
  if (change < -threshold) return RegimeLabel::bear;
  return RegimeLabel::flat;
}

std::vector<Segment> nasdaq_regime_preset() {
  return {{Date(2000, 2, 1), Date(2002, 1, 31)},
          {Date(2004, 9, 1), Date(2006, 8, 31)},
          {Date(2013, 8, 1), Date(2015, 7, 31)}};
}

std::size_t threads_from_env() {
  if (const char* v = std::getenv("TRENDLAB_THREADS")) {
    if (const auto n = text::parse_unsigned(v)) return static_cast<std::size_t>(*n);
    throw ConfigError("TRENDLAB_THREADS must be a non-negative integer");
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

void parallel_for(std::size_t count, std::size_t threads,
                  const std::function<void(std::size_t)>& job) {
  if (threads <= 1 || count <= 1) {
    for (std::size_t i = 0; i < count; ++i) job(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < std::min(threads, count); ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) {
        try {
          job(i);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

const ReportRow* ExperimentReport::find(std::string_view model, std::string_view interval,
                                        std::string_view regime, std::string_view features,
                                        std::uint64_t seed) const {
  for (const auto& r : rows)
    if (r.model == model && r.interval == interval && r.regime == regime &&
        r.features == features && r.seed == seed)
      return &r;
  return nullptr;
}

void write_report_csv(std::ostream& out, const ExperimentReport& report) {
  out << kReportCsvHeader << '\n';
  for (const auto& r : report.rows) {
    out << r.model << ',' << r.interval << ',' << r.regime << ',' << r.features << ',' << r.seed
        << ',' << text::format_double(r.train_rmse) << ',' << text::format_double(r.test_rmse)
        << ',' << text::format_double(r.wall_ms) << ',';
    // Error messages may contain commas.
    std::string err = r.error;
    std::replace(err.begin(), err.end(), ',', ';');
    out << err << '\n';
  }
}

nlohmann::json report_to_json(const ExperimentReport& report) {
  nlohmann::json rows = nlohmann::json::array();
  const auto number = [](double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); };
  for (const auto& r : report.rows) {
    rows.push_back({{"model", r.model},
                    {"interval", r.interval},
                    {"regime", r.regime},
                    {"features", r.features},
                    {"seed", r.seed},
                    {"train_rmse", number(r.train_rmse)},
                    {"test_rmse", number(r.test_rmse)},
                    {"wall_ms", r.wall_ms},
                    {"error", r.error}});
  }
  return {{"experiment", report.experiment}, {"rows", rows}};
}

CellResult run_cell(const FeatureFrame& frame, CellKind cell, bool with_sentiment,
                    std::uint64_t seed, const ExperimentConfig& config) {
  PrepareOptions options;
  options.window = config.train.window;
  options.ratio = config.ratio;
  options.with_sentiment = with_sentiment;
  options.fit_on_full_period = config.fit_on_full_period;
  CellResult out{{}, prepare_dataset(frame, options)};
  TrainConfig tc = config.train;
  tc.cell = cell;
  tc.seed = seed;
  out.run = train(out.data.dataset, StreamLayout::standard(with_sentiment, config.projected), tc);
  return out;
}

namespace {

struct CellSpec {
  const FeatureFrame* frame;
  ReportRow row;
  bool with_sentiment;
};

std::vector<ReportRow> run_cells(std::vector<CellSpec> specs, const ExperimentConfig& config) {
  std::vector<ReportRow> rows(specs.size());
  parallel_for(specs.size(), config.threads, [&](std::size_t i) {
    auto& spec = specs[i];
    ReportRow row = spec.row;
    try {
      const auto result = run_cell(*spec.frame, parse_cell_kind(row.model), spec.with_sentiment,
                                   row.seed, config);
      row.train_rmse = result.run.final_train_rmse;
      row.test_rmse = result.run.test_rmse.value_or(kNaN);
      if (!result.run.test_rmse) row.error = "empty test split";
      if (config.record_wall_time) row.wall_ms = result.run.wall_ms;
    } catch (const std::exception& e) {
      row.train_rmse = row.test_rmse = kNaN;
      row.error = e.what();
    }
    rows[i] = std::move(row);
  });
  return rows;
}

ReportRow row_template(CellKind model, Interval interval, std::string regime, bool with_sentiment,
                       std::uint64_t seed) {
  ReportRow r;
  r.model = std::string(to_string(model));
  r.interval = std::string(to_string(interval));
  r.regime = std::move(regime);
  r.features = with_sentiment ? "full" : "no-sentiment";
  r.seed = seed;
  return r;
}

constexpr CellKind kModels[] = {CellKind::lstm, CellKind::rnn};

}  // namespace

ExperimentReport run_interval_experiment(const PriceSeries& daily, const SentimentSeries* sentiment,
                                         const ExperimentConfig& config) {
  if (daily.interval() != Interval::daily) throw DataError("interval experiment needs a daily series");
  const auto weekly = resample_weekly(daily);
  std::optional<SentimentSeries> weekly_sentiment;
  if (sentiment) weekly_sentiment = resample_sentiment_weekly(*sentiment);
  const auto daily_frame = build_feature_frame(daily, config.indicators, sentiment).frame;
  const auto weekly_frame =
      build_feature_frame(weekly, config.indicators, sentiment ? &*weekly_sentiment : nullptr).frame;
  for (const auto* f : {&daily_frame, &weekly_frame})
    if (f->size() <= config.train.window + 1)
      throw DataError("insufficient data for the interval experiment after warm-up");

  std::vector<CellSpec> specs;
  for (auto seed : config.seeds)
    for (auto interval : {Interval::daily, Interval::weekly})
      for (auto model : kModels)
        specs.push_back({interval == Interval::daily ? &daily_frame : &weekly_frame,
                         row_template(model, interval, "all", true, seed), true});
  return {"interval", run_cells(std::move(specs), config)};
}

ExperimentReport run_regime_experiment(const PriceSeries& series, const std::vector<Segment>& segments,
                                       const SentimentSeries* sentiment,
                                       const ExperimentConfig& config) {
  if (segments.empty()) throw ConfigError("regime experiment needs at least one segment");
  long shortest = std::numeric_limits<long>::max(), longest = 0;
  for (const auto& s : segments) {
    if (!(s.first < s.last)) throw ConfigError("segment " + s.first.iso() + " does not end after it starts");
    shortest = std::min(shortest, s.last - s.first);
    longest = std::max(longest, s.last - s.first);
  }
  if (longest - shortest > 7)
    throw ConfigError("regime segments must span equal periods (lengths differ by " +
                      std::to_string(longest - shortest) + " days)");

  const auto full = build_feature_frame(series, config.indicators, sentiment).frame;
  std::vector<FeatureFrame> frames;
  std::vector<std::string> labels;
  for (const auto& s : segments) {
    const auto bars = series.slice(s.first, s.last);
    labels.emplace_back(to_string(classify_regime(bars, config.regime_threshold)));
    frames.push_back(full.slice(s.first, s.last));
    const std::size_t windows =
        frames.back().size() > config.train.window ? frames.back().size() - config.train.window : 0;
    if (windows == 0 || windows - train_count(windows, config.ratio) == 0)
      throw DataError("segment " + s.first.iso() + ".." + s.last.iso() +
                      " is too short for a train/test split");
  }

  std::vector<CellSpec> specs;
  for (auto seed : config.seeds)
    for (std::size_t s = 0; s < segments.size(); ++s)
      for (auto model : kModels)
        specs.push_back({&frames[s], row_template(model, series.interval(), labels[s], true, seed), true});
  return {"regime", run_cells(std::move(specs), config)};
}

ExperimentReport run_sentiment_ablation(const PriceSeries& series, const SentimentSeries& sentiment,
                                        const ExperimentConfig& config) {
  const auto frame = build_feature_frame(series, config.indicators, &sentiment).frame;
  if (frame.sentiment_defaulted) throw DataError("full variant is missing the sentiment column");
  std::vector<CellSpec> specs;
  for (auto seed : config.seeds)
    for (bool with : {true, false})
      for (auto model : kModels)
        specs.push_back({&frame, row_template(model, series.interval(), "all", with, seed), with});
  return {"sentiment", run_cells(std::move(specs), config)};
}

std::vector<ForgetGatePoint> run_forget_gate_experiment(const PriceSeries& series,
                                                        const SentimentSeries* sentiment,
                                                        const std::vector<std::size_t>& windows,
                                                        const ExperimentConfig& config) {
  if (windows.empty()) throw ConfigError("forget-gate experiment needs at least one window size");
  const auto frame = build_feature_frame(series, config.indicators, sentiment).frame;
  std::vector<std::pair<std::uint64_t, std::size_t>> cells;
  for (auto seed : config.seeds)
    for (auto w : windows) cells.emplace_back(seed, w);

  std::vector<ForgetGatePoint> points(cells.size());
  parallel_for(cells.size(), config.threads, [&](std::size_t i) {
    const auto [seed, window] = cells[i];
    ExperimentConfig local = config;
    local.train.window = window;
    CellResult result;
    try {
      result = run_cell(frame, CellKind::lstm, true, seed, local);
    } catch (const DivergenceError& e) {
      throw DivergenceError("window " + std::to_string(window) + ": " + e.what(), e.epoch());
    }
    const auto test = result.data.dataset.test();
    if (test.empty()) throw DataError("window " + std::to_string(window) + ": empty test split");
    std::vector<GateTrace> traces;
    for (const auto& w : test) {
      auto t = forward_sequence(w.inputs, window, result.run.params).traces();
      traces.insert(traces.end(), t.begin(), t.end());
    }
    points[i] = {window, seed, mean_forget_activation(traces), *result.run.test_rmse};
  });
  return points;
}

void write_forget_gate_csv(std::ostream& out, const std::vector<ForgetGatePoint>& points) {
  out << kForgetGateCsvHeader << '\n';
  for (const auto& p : points)
    out << p.window << ',' << p.seed << ',' << text::format_double(p.mean_forget) << ','
        << text::format_double(p.test_rmse) << '\n';
}

std::vector<AggregateRow> aggregate_report(const std::vector<ExperimentReport>& reports) {
  if (reports.empty()) throw DataError("nothing to aggregate");
  for (const auto& r : reports)
    if (r.experiment != reports.front().experiment)
      throw DataError("cannot aggregate '" + r.experiment + "' with '" +
                      reports.front().experiment + "' reports (schema mismatch)");

  using Key = std::tuple<std::string, std::string, std::string, std::string>;
  std::map<Key, std::vector<const ReportRow*>> groups;
  for (const auto& rep : reports)
    for (const auto& row : rep.rows) groups[{row.model, row.interval, row.regime, row.features}].push_back(&row);

  std::vector<AggregateRow> out;
  for (const auto& [key, rows] : groups) {
    AggregateRow a{std::get<0>(key), std::get<1>(key), std::get<2>(key), std::get<3>(key)};
    std::vector<double> train, test;
    for (const auto* r : rows) {
      if (!r->ok()) {
        ++a.failures;
        continue;
      }
      train.push_back(r->train_rmse);
      test.push_back(r->test_rmse);
    }
    a.count = train.size();
    const auto stats = [](const std::vector<double>& xs) -> std::pair<double, double> {
      if (xs.empty()) return {kNaN, kNaN};
      double mean = 0.0;
      for (double x : xs) mean += x;
      mean /= static_cast<double>(xs.size());
      double var = 0.0;
      for (double x : xs) var += (x - mean) * (x - mean);
      return {mean, std::sqrt(var / static_cast<double>(xs.size()))};
    };
    std::tie(a.train_mean, a.train_std) = stats(train);
    std::tie(a.test_mean, a.test_std) = stats(test);
    out.push_back(std::move(a));
  }
  return out;
}

void write_aggregate_csv(std::ostream& out, const std::vector<AggregateRow>& rows) {
  out << kAggregateCsvHeader << '\n';
  for (const auto& a : rows)
    out << a.model << ',' << a.interval << ',' << a.regime << ',' << a.features << ',' << a.count
        << ',' << a.failures << ',' << text::format_double(a.train_mean) << ','
        << text::format_double(a.train_std) << ',' << text::format_double(a.test_mean) << ','
        << text::format_double(a.test_std) << '\n';
}

}  // namespace trendlab
