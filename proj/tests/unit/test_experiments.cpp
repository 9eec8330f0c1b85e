#include <doctest.h>

#include <cmath>
#include <numbers>
#include <set>
#include <sstream>

#include "fixtures.hpp"
#include "trendlab/error.hpp"
#include "trendlab/experiments.hpp"
#include "trendlab/synthetic.hpp"

using namespace trendlab;

namespace {

ExperimentConfig tiny(std::vector<std::uint64_t> seeds = {1, 2}) {
  ExperimentConfig c;
  c.train.epochs = 3;
  c.train.hidden_size = 3;
  c.train.layers = 1;
  c.train.window = 4;
  c.seeds = std::move(seeds);
  c.threads = 0;
  return c;
}

std::vector<double> ramp(int n, double from, double step) {
  std::vector<double> v;
  for (int i = 0; i < n; ++i) v.push_back(from + step * i);
  return v;
}

/// Business-day series shaped like the preset periods: falling through 2000-2001,
/// oscillating without drift until mid 2013, rising to mid 2015.
PriceSeries preset_shaped() {
  std::vector<double> path;
  Date d(1999, 6, 1);
  const Date end(2015, 12, 31);
  std::size_t t = 0;
  for (; d < end; d = d + 1) {
    const auto wd = std::chrono::weekday{d.days()}.iso_encoding();
    if (wd > 5) continue;
    double level = 100.0;
    if (d < Date(2000, 2, 1)) {
      level = 200.0;
    } else if (d < Date(2002, 2, 1)) {
      level = 200.0 - 100.0 * static_cast<double>(d - Date(2000, 2, 1)) / 731.0;
    } else if (d >= Date(2013, 8, 1)) {
      level = 100.0 + 100.0 * static_cast<double>(d - Date(2013, 8, 1)) / 730.0;
    }
    path.push_back(level + 3.0 * std::sin(2.0 * std::numbers::pi * static_cast<double>(t++) / 50.0));
  }
  return synthetic::bars_from_path(path, Date(1999, 6, 1), Interval::daily, 1, "NDX");
}

}  // namespace

TEST_SUITE("experiments") {

TEST_CASE("regime classification") {
  CHECK(classify_regime(fixtures::series_from(ramp(30, 10, 1))) == RegimeLabel::bull);
  CHECK(classify_regime(fixtures::series_from(ramp(30, 100, -1))) == RegimeLabel::bear);
  CHECK(classify_regime(fixtures::series_from(std::vector<double>(30, 5.0))) == RegimeLabel::flat);
  CHECK(regime_slope(fixtures::series_from(ramp(30, 10, 1))) == doctest::Approx(2.0));
  CHECK_THROWS_AS(classify_regime(fixtures::series_from(ramp(5, 10, 1))), DataError);

  const auto fx = synthetic::regime_sequence(4);
  const char* expected[] = {"bear", "flat", "bull"};
  for (std::size_t i = 0; i < 3; ++i)
    CHECK(to_string(classify_regime(fx.series.slice(fx.segments[i].first, fx.segments[i].last))) ==
          std::string(expected[i]));
}

TEST_CASE("preset segments are labelled bear, flat, bull") {
  const auto preset = nasdaq_regime_preset();
  REQUIRE(preset.size() == 3);
  CHECK(preset[0].first == Date(2000, 2, 1));
  CHECK(preset[0].last == Date(2002, 1, 31));
  CHECK(preset[1].first == Date(2004, 9, 1));
  CHECK(preset[2].last == Date(2015, 7, 31));

  const auto series = preset_shaped();
  auto config = tiny({1});
  const auto report = run_regime_experiment(series, preset, nullptr, config);
  REQUIRE(report.rows.size() == 6);
  CHECK(report.rows[0].regime == "bear");
  CHECK(report.rows[2].regime == "flat");
  CHECK(report.rows[4].regime == "bull");
  for (const auto& r : report.rows) CHECK(r.ok());
}

TEST_CASE("regime segments must have equal lengths") {
  const auto series = preset_shaped();
  auto segs = nasdaq_regime_preset();
  segs[1].last = Date(2006, 12, 31);
  CHECK_THROWS_WITH_AS(run_regime_experiment(series, segs, nullptr, tiny()), doctest::Contains("equal"),
                       ConfigError);
}

TEST_CASE("flat segment is the hardest to predict") {
  ExperimentConfig c;
  c.train.epochs = 200;
  c.train.hidden_size = 8;
  c.train.layers = 2;
  c.train.window = 8;
  int flat_worst = 0;
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    const auto fx = synthetic::regime_sequence(seed, 500);
    c.seeds = {seed};
    const auto report = run_regime_experiment(fx.series, fx.segments, nullptr, c);
    const auto* bear = report.find("lstm", "daily", "bear", "full", seed);
    const auto* flat = report.find("lstm", "daily", "flat", "full", seed);
    const auto* bull = report.find("lstm", "daily", "bull", "full", seed);
    REQUIRE((bear && flat && bull));
    INFO("seed " << seed << ": bear " << bear->test_rmse << " flat " << flat->test_rmse << " bull " << bull->test_rmse);
    if (flat->test_rmse > bear->test_rmse && flat->test_rmse > bull->test_rmse) ++flat_worst;
  }
  CHECK(flat_worst >= 2);
}

TEST_CASE("interval report is the model by interval cross product") {
  const auto daily = synthetic::trend_seasonality(1, 400);
  const auto report = run_interval_experiment(daily, nullptr, tiny());
  CHECK(report.experiment == "interval");
  REQUIRE(report.rows.size() == 8);
  std::set<std::string> cells;
  for (const auto& r : report.rows) {
    CHECK(r.ok());
    CHECK(std::isfinite(r.test_rmse));
    CHECK(r.wall_ms == 0.0);
    cells.insert(r.model + "/" + r.interval);
  }
  CHECK(cells == std::set<std::string>{"lstm/daily", "lstm/weekly", "rnn/daily", "rnn/weekly"});
  CHECK(report.find("lstm", "weekly", "all", "full", 2) != nullptr);
  CHECK_THROWS_AS(run_interval_experiment(resample_weekly(daily), nullptr, tiny()), DataError);
}

TEST_CASE("reports are reproducible and independent of the thread count") {
  const auto daily = synthetic::trend_seasonality(2, 400);
  auto serial = tiny();
  auto threaded = tiny();
  threaded.threads = 3;
  std::ostringstream a, b, c;
  write_report_csv(a, run_interval_experiment(daily, nullptr, serial));
  write_report_csv(b, run_interval_experiment(daily, nullptr, serial));
  write_report_csv(c, run_interval_experiment(daily, nullptr, threaded));
  CHECK(a.str() == b.str());
  CHECK(a.str() == c.str());
  CHECK(a.str().substr(0, a.str().find('\n')) == kReportCsvHeader);
}

TEST_CASE("sentiment ablation") {
  const auto series = synthetic::trend_seasonality(3, 300);
  const auto sentiment = synthetic::leading_sentiment(series, 3);
  const auto report = run_sentiment_ablation(series, sentiment, tiny({1}));
  REQUIRE(report.rows.size() == 4);
  std::set<std::string> features;
  for (const auto& r : report.rows) features.insert(r.features);
  CHECK(features == std::set<std::string>{"full", "no-sentiment"});

  const auto frame = build_feature_frame(series, {}, &sentiment).frame;
  CHECK(run_cell(frame, CellKind::lstm, true, 1, tiny()).data.dataset.input_dim == 7);
  const auto ablated = run_cell(frame, CellKind::lstm, false, 1, tiny());
  CHECK(ablated.data.dataset.input_dim == 6);
  CHECK(ablated.run.params.shape.streams.fused_dim() == 2 * 3);
}

TEST_CASE("leading sentiment points at the next move") {
  const auto series = synthetic::trend_seasonality(5, 300);
  const auto sent = synthetic::leading_sentiment(series, 5, 0.4, 0.0);
  std::size_t agree = 0;
  for (std::size_t t = 0; t + 1 < series.size(); ++t) {
    const double move = series[t + 1].adjusted - series[t].adjusted;
    if ((sent.at(series[t].date) - 0.5) * move > 0) ++agree;
  }
  CHECK(agree == series.size() - 1);
  for (const auto& [d, s] : synthetic::noise_sentiment(series, 1)) {
    CHECK(s >= 0.0);
    CHECK(s <= 1.0);
  }
}

TEST_CASE("forget-gate experiment") {
  const auto series = synthetic::ar8(1, 200);
  const auto points = run_forget_gate_experiment(series, nullptr, {4}, tiny({1}));
  REQUIRE(points.size() == 1);
  CHECK(points[0].window == 4);
  CHECK(points[0].mean_forget > 0.0);
  CHECK(points[0].mean_forget < 1.0);
  std::ostringstream out;
  write_forget_gate_csv(out, points);
  CHECK(out.str().rfind("window_size,seed,mean_forget,test_rmse\n4,1,", 0) == 0);
}

TEST_CASE("aggregation") {
  ExperimentReport r{"interval", {}};
  ReportRow row{"lstm", "daily", "all", "full", 1, 0.1, 0.2, 0, ""};
  r.rows.push_back(row);
  row.seed = 2;
  row.test_rmse = 0.4;
  r.rows.push_back(row);
  row.seed = 3;
  row.error = "diverged";
  r.rows.push_back(row);
  const auto agg = aggregate_report({r});
  REQUIRE(agg.size() == 1);
  CHECK(agg[0].count == 2);
  CHECK(agg[0].failures == 1);
  CHECK(agg[0].test_mean == doctest::Approx(0.3));
  CHECK(agg[0].test_std == doctest::Approx(0.1));
  CHECK(agg[0].train_std == 0.0);

  SUBCASE("single report of one seed has zero spread") {
    ExperimentReport one{"interval", {ReportRow{"rnn", "weekly", "all", "full", 1, 0.3, 0.5, 0, ""}}};
    const auto a = aggregate_report({one});
    CHECK(a[0].test_mean == 0.5);
    CHECK(a[0].test_std == 0.0);
  }
  SUBCASE("three datasets with two seeds each") {
    std::vector<ExperimentReport> reports;
    for (int d = 0; d < 3; ++d) {
      ExperimentReport rep{"regime", {}};
      for (std::uint64_t s = 1; s <= 2; ++s) rep.rows.push_back({"lstm", "daily", "bull", "full", s, 0.1, 0.1 * (d + 1), 0, ""});
      reports.push_back(rep);
    }
    const auto a = aggregate_report(reports);
    REQUIRE(a.size() == 1);
    CHECK(a[0].count == 6);
  }
  SUBCASE("mixed experiments are a schema mismatch") {
    ExperimentReport other{"regime", {}};
    CHECK_THROWS_AS(aggregate_report({r, other}), DataError);
  }
}

TEST_CASE("report csv escapes error text") {
  ExperimentReport r{"regime", {ReportRow{"rnn", "daily", "flat", "full", 3, NAN, NAN, 0, "bad, worse"}}};
  std::ostringstream out;
  write_report_csv(out, r);
  CHECK(out.str().find("bad; worse") != std::string::npos);
  const auto j = report_to_json(r);
  CHECK(j["rows"][0]["test_rmse"].is_null());
}

TEST_CASE("thread count from the environment") {
  ::setenv("TRENDLAB_THREADS", "0", 1);
  CHECK(threads_from_env() == 0);
  ::setenv("TRENDLAB_THREADS", "two", 1);
  CHECK_THROWS_AS(threads_from_env(), ConfigError);
  ::unsetenv("TRENDLAB_THREADS");
  CHECK(threads_from_env() >= 1);
}

}  // TEST_SUITE
