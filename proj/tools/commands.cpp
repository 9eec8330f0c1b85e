#include "commands.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>

#include "trendlab/checkpoint.hpp"
#include "trendlab/error.hpp"
#include "trendlab/experiments.hpp"
#include "trendlab/features.hpp"
#include "trendlab/synthetic.hpp"
#include "trendlab/text.hpp"

namespace trendlab::cli {

using nlohmann::json;

namespace {

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw DataError("cannot open " + p.generic_string());
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const fs::path& p, const std::string& bytes) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out || !(out << bytes) || !out.flush()) throw DataError("cannot write " + p.generic_string());
}

template <typename Fn>
std::string render(Fn&& fn) {
  std::ostringstream s;
  fn(s);
  return s.str();
}

void prepare_out_dir(const RunConfig& config) {
  std::error_code ec;
  fs::create_directories(config.out, ec);
  if (ec) throw DataError("cannot create output directory " + config.out.generic_string() + ": " + ec.message());
  write_file(config.out / "config.json", config.to_json().dump(2) + "\n");
}

void require(const std::optional<fs::path>& p, const char* key, std::string_view command) {
  if (!p) throw ConfigError(std::string(command) + " needs data." + key + " in the config");
}

PriceSeries load_daily_prices(const RunConfig& config) {
  std::istringstream in(read_file(*config.prices));
  return parse_price_csv(in, config.symbol, Interval::daily);
}

PriceSeries at_interval(const PriceSeries& daily, Interval interval) {
  return interval == Interval::weekly ? resample_weekly(daily) : daily;
}

std::optional<SentimentSeries> load_sentiment(const RunConfig& config, Interval interval) {
  if (!config.sentiment) return std::nullopt;
  std::istringstream in(read_file(*config.sentiment));
  auto daily = parse_sentiment_csv(in);
  if (interval == Interval::weekly) return resample_sentiment_weekly(daily);
  return daily;
}

void warn_neutral_sentiment(Io io) {
  io.err << "warning: no sentiment file configured; every row gets the neutral score "
         << text::format_double(kNeutralSentiment) << "\n";
}

FrameBuild frame_from_prices(const RunConfig& config, Io io) {
  const auto series = at_interval(load_daily_prices(config), config.interval);
  const auto sentiment = load_sentiment(config, config.interval);
  if (!sentiment) warn_neutral_sentiment(io);
  return build_feature_frame(series, config.indicators, sentiment ? &*sentiment : nullptr);
}

/// Feature rows from data.features when given, otherwise built from the price file.
FeatureFrame load_frame(const RunConfig& config, Io io) {
  if (config.features) {
    std::istringstream in(read_file(*config.features));
    return parse_feature_csv(in);
  }
  return frame_from_prices(config, io).frame;
}

PrepareOptions prepare_options(const RunConfig& config) {
  PrepareOptions o;
  o.window = config.train.window;
  o.ratio = config.ratio;
  o.with_sentiment = config.with_sentiment;
  o.fit_on_full_period = config.fit_on_full_period;
  return o;
}

json optional_number(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  std::ostringstream s;
  s << std::fixed << std::setprecision(6) << v;
  return s.str();
}

}  // namespace

void cmd_features(const RunConfig& config, Io io) {
  require(config.prices, "prices", "features");
  const auto build = frame_from_prices(config, io);
  prepare_out_dir(config);
  write_file(config.out / "features.csv", render([&](std::ostream& s) { write_feature_csv(s, build.frame); }));
  io.out << "rows: " << build.frame.size() << "\n"
         << "warm-up rows trimmed: " << build.warmup_trimmed << "\n"
         << "wrote " << (config.out / "features.csv").generic_string() << "\n";
}

void cmd_train(const RunConfig& config, Io io) {
  if (!config.features) require(config.prices, "prices", "train");
  const auto frame = load_frame(config, io);
  const auto data = prepare_dataset(frame, prepare_options(config));
  const auto streams = StreamLayout::standard(config.with_sentiment, config.projected);
  const auto run = train(data.dataset, streams, config.train);

  Checkpoint cp{config.train, run.params, data.scaling, run.final_train_rmse, run.test_rmse};
  prepare_out_dir(config);
  write_file(config.out / "checkpoint.json", save_checkpoint(cp));
  write_file(config.out / "loss.csv", render([&](std::ostream& s) {
               s << "epoch,train_rmse\n";
               for (std::size_t e = 0; e < run.epoch_rmse.size(); ++e)
                 s << e + 1 << ',' << text::format_double(run.epoch_rmse[e]) << '\n';
             }));
  const json metrics = {{"epochs", config.train.epochs},
                        {"train_windows", data.dataset.train().size()},
                        {"test_windows", data.dataset.test().size()},
                        {"train_rmse", run.final_train_rmse},
                        {"test_rmse", optional_number(run.test_rmse)}};
  write_file(config.out / "metrics.json", metrics.dump(2) + "\n");
  io.out << "train windows: " << data.dataset.train().size() << ", test windows: " << data.dataset.test().size()
         << "\n"
         << "train rmse: " << fmt(run.final_train_rmse) << "\n"
         << "test rmse: " << (run.test_rmse ? fmt(*run.test_rmse) : std::string("n/a")) << "\n"
         << "wrote " << (config.out / "checkpoint.json").generic_string() << "\n";
}

void cmd_predict(const RunConfig& config, Io io) {
  require(config.checkpoint, "checkpoint", "predict");
  if (!config.features) require(config.prices, "prices", "predict");
  const auto cp = load_checkpoint(read_file(*config.checkpoint));
  const bool with_sentiment = cp.params.shape.streams.dims.size() == 3;
  const std::size_t window = cp.config.window;
  const auto frame = load_frame(config, io);
  const std::size_t n = frame.size();
  if (n < window)
    throw DataError("insufficient history: " + std::to_string(n) + " rows for window " + std::to_string(window));

  const auto rows = encode_rows(frame, cp.scaling, with_sentiment);
  if (rows.front().size() != cp.params.shape.streams.input_dim())
    throw DataError("feature width " + std::to_string(rows.front().size()) +
                    " does not match the checkpoint input width " +
                    std::to_string(cp.params.shape.streams.input_dim()));
  std::vector<double> labels(n, std::nan(""));
  for (std::size_t i = 1; i < n; ++i) labels[i] = normalize(frame.rows[i - 1].answer, cp.scaling.price);

  std::optional<WindowedDataset> dataset;
  BatchResult train_eval, test_eval;
  if (n > window) {
    dataset = make_windows(rows, labels, window, config.ratio);
    train_eval = evaluate(cp.params, dataset->train(), window);
    if (!dataset->test().empty()) test_eval = evaluate(cp.params, dataset->test(), window);
  }
  // The window ending at the last row forecasts one step past the data.
  std::vector<double> tail;
  for (std::size_t r = n - window; r < n; ++r) tail.insert(tail.end(), rows[r].begin(), rows[r].end());
  const double forecast = forward_sequence(tail, window, cp.params).prediction;

  prepare_out_dir(config);
  write_file(config.out / "predictions.csv", render([&](std::ostream& s) {
               s << "target_row,split,predicted_normalized,predicted,actual_normalized,actual\n";
               const auto line = [&](std::size_t row, const char* split, double p, double a) {
                 s << row << ',' << split << ',' << text::format_double(p) << ','
                   << text::format_double(denormalize(p, cp.scaling.price)) << ',';
                 if (std::isnan(a))
                   s << ",\n";
                 else
                   s << text::format_double(a) << ',' << text::format_double(denormalize(a, cp.scaling.price))
                     << '\n';
               };
               if (dataset) {
                 const auto tr = dataset->train();
                 const auto te = dataset->test();
                 for (std::size_t k = 0; k < tr.size(); ++k)
                   line(tr[k].label_index, "train", train_eval.predictions[k], tr[k].label);
                 for (std::size_t k = 0; k < te.size(); ++k)
                   line(te[k].label_index, "test", test_eval.predictions[k], te[k].label);
               }
               const double last = std::isnan(frame.rows.back().answer)
                                       ? std::nan("")
                                       : normalize(frame.rows.back().answer, cp.scaling.price);
               line(n, std::isnan(last) ? "forecast" : "test", forecast, last);
             }));
  io.out << "predictions: " << (n - window + 1) << "\n";
  if (dataset) {
    io.out << "train rmse: " << fmt(train_eval.rmse) << "\n";
    if (!dataset->test().empty()) io.out << "test rmse: " << fmt(test_eval.rmse) << "\n";
  }
  io.out << "next-step forecast: " << fmt(denormalize(forecast, cp.scaling.price)) << "\n"
         << "wrote " << (config.out / "predictions.csv").generic_string() << "\n";
}

namespace {

void print_summary(Io io, const ExperimentReport& report) {
  io.out << report.experiment << " experiment\n";
  io.out << std::left << std::setw(6) << "model" << std::setw(8) << "interval" << std::setw(7) << "regime"
         << std::setw(14) << "features" << std::right << std::setw(4) << "n" << std::setw(12) << "train_mean"
         << std::setw(12) << "test_mean" << std::setw(12) << "test_std" << "\n";
  for (const auto& a : aggregate_report({report})) {
    io.out << std::left << std::setw(6) << a.model << std::setw(8) << a.interval << std::setw(7) << a.regime
           << std::setw(14) << a.features << std::right << std::setw(4) << a.count << std::setw(12)
           << fmt(a.train_mean) << std::setw(12) << fmt(a.test_mean) << std::setw(12) << fmt(a.test_std);
    if (a.failures) io.out << "  (" << a.failures << " failed)";
    io.out << "\n";
  }
}

std::size_t write_report(const RunConfig& config, const ExperimentReport& report, Io io) {
  const auto stem = "report_" + report.experiment;
  write_file(config.out / (stem + ".csv"), render([&](std::ostream& s) { write_report_csv(s, report); }));
  write_file(config.out / (stem + ".json"), report_to_json(report).dump(2) + "\n");
  print_summary(io, report);
  std::size_t failed = 0;
  for (const auto& r : report.rows)
    if (!r.ok()) {
      ++failed;
      io.err << "warning: " << report.experiment << " cell " << r.model << '/' << r.interval << '/' << r.regime
             << '/' << r.features << " seed " << r.seed << " failed: " << r.error << "\n";
    }
  return report.rows.size() - failed;
}

}  // namespace

void cmd_experiment(const RunConfig& config, std::string_view which, Io io) {
  const bool all = which == "all";
  if (!all && which != "interval" && which != "regime" && which != "sentiment" && which != "forget-gate")
    throw ConfigError("unknown experiment '" + std::string(which) +
                      "' (expected interval, regime, sentiment, forget-gate or all)");
  require(config.prices, "prices", "experiment");
  if (all || which == "sentiment") require(config.sentiment, "sentiment", "the sentiment experiment");

  const auto daily = load_daily_prices(config);
  const auto daily_sentiment = load_sentiment(config, Interval::daily);
  if (!daily_sentiment) warn_neutral_sentiment(io);
  const auto series = at_interval(daily, config.interval);
  const auto sentiment = load_sentiment(config, config.interval);
  const SentimentSeries* sent = sentiment ? &*sentiment : nullptr;
  const auto ec = config.experiment_config();

  prepare_out_dir(config);
  std::size_t succeeded = 0, cells = 0;
  if (all || which == "interval") {
    const auto r = run_interval_experiment(daily, daily_sentiment ? &*daily_sentiment : nullptr, ec);
    succeeded += write_report(config, r, io);
    cells += r.rows.size();
  }
  if (all || which == "regime") {
    const auto r = run_regime_experiment(series, config.segments, sent, ec);
    succeeded += write_report(config, r, io);
    cells += r.rows.size();
  }
  if (all || which == "sentiment") {
    const auto r = run_sentiment_ablation(series, *sentiment, ec);
    succeeded += write_report(config, r, io);
    cells += r.rows.size();
  }
  if (all || which == "forget-gate") {
    const auto points = run_forget_gate_experiment(series, sent, config.forget_gate_windows, ec);
    write_file(config.out / "forget_gate.csv", render([&](std::ostream& s) { write_forget_gate_csv(s, points); }));
    io.out << "forget-gate experiment\n" << std::left << std::setw(8) << "window" << std::setw(6) << "seed"
           << std::right << std::setw(12) << "mean_forget" << std::setw(12) << "test_rmse" << "\n";
    for (const auto& p : points)
      io.out << std::left << std::setw(8) << p.window << std::setw(6) << p.seed << std::right << std::setw(12)
             << fmt(p.mean_forget) << std::setw(12) << fmt(p.test_rmse) << "\n";
    succeeded += points.size();
    cells += points.size();
  }
  if (cells > 0 && succeeded == 0) throw DataError("every experiment cell failed");
}

void cmd_generate(std::string_view fixture, std::uint64_t seed, const fs::path& out, Io io) {
  std::optional<PriceSeries> series;
  json segments = "nasdaq";
  if (fixture == "sine") {
    series = synthetic::sine(60);
  } else if (fixture == "trend") {
    series = synthetic::trend_seasonality(seed);
  } else if (fixture == "ar8") {
    series = synthetic::ar8(seed);
  } else if (fixture == "regime") {
    auto fx = synthetic::regime_sequence(seed);
    segments = json::array();
    for (const auto& s : fx.segments) segments.push_back({{"first", s.first.iso()}, {"last", s.last.iso()}});
    series = std::move(fx.series);
  } else {
    throw ConfigError("unknown fixture '" + std::string(fixture) + "' (expected sine, trend, ar8 or regime)");
  }
  std::error_code ec;
  fs::create_directories(out, ec);
  if (ec) throw DataError("cannot create " + out.generic_string() + ": " + ec.message());
  write_file(out / "prices.csv", render([&](std::ostream& s) { write_price_csv(s, *series); }));
  write_file(out / "sentiment.csv", render([&](std::ostream& s) {
               write_sentiment_csv(s, synthetic::leading_sentiment(*series, seed));
             }));
  const json config = {{"data", {{"prices", "prices.csv"}, {"sentiment", "sentiment.csv"}, {"symbol", series->symbol()}}},
                       {"interval", "daily"},
                       {"train", {{"epochs", 200}, {"hidden_size", 8}, {"layers", 2}, {"window", 8}, {"seed", seed}}},
                       {"experiment", {{"seeds", {1, 2, 3}}, {"segments", segments}}},
                       {"out", "out"}};
  write_file(out / "config.json", config.dump(2) + "\n");
  io.out << "wrote " << series->size() << " bars to " << (out / "prices.csv").generic_string() << "\n";
}

namespace {

struct Overrides {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<std::size_t> epochs;
  std::optional<double> lr;
  std::optional<std::size_t> layers;
  std::optional<std::size_t> window;
  std::optional<std::string> interval;
  std::optional<std::string> checkpoint;
  bool no_sentiment = false;
};

void add_run_options(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--config", o.config, "JSON run configuration")->required();
  cmd->add_option("--seed", o.seed, "Override train.seed");
  cmd->add_option("--out", o.out, "Override the output directory");
  cmd->add_option("--epochs", o.epochs, "Override train.epochs");
  cmd->add_option("--lr", o.lr, "Override train.learning_rate");
  cmd->add_option("--layers", o.layers, "Override train.layers");
  cmd->add_option("--window", o.window, "Override train.window");
  cmd->add_option("--interval", o.interval, "daily or weekly")->check(CLI::IsMember({"daily", "weekly"}));
  cmd->add_flag("--no-sentiment", o.no_sentiment, "Drop the sentiment stream from the model");
}

RunConfig resolve(const Overrides& o) {
  auto config = load_run_config(o.config);
  if (o.seed) config.train.seed = *o.seed;
  if (o.out) config.out = *o.out;
  if (o.epochs) config.train.epochs = *o.epochs;
  if (o.lr) config.train.learning_rate = *o.lr;
  if (o.layers) config.train.layers = *o.layers;
  if (o.window) config.train.window = *o.window;
  if (o.interval) config.interval = parse_interval(*o.interval);
  if (o.checkpoint) config.checkpoint = *o.checkpoint;
  if (o.no_sentiment) config.with_sentiment = false;
  config.validate();
  return config;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"LSTM trend forecasting on fused price, indicator and sentiment features", "trendlab"};
  app.require_subcommand(1);
  Overrides o;

  auto* features = app.add_subcommand("features", "Build the feature CSV from prices and sentiment");
  add_run_options(features, o);
  auto* train_cmd = app.add_subcommand("train", "Train a model and write checkpoint, loss and metrics");
  add_run_options(train_cmd, o);
  auto* predict = app.add_subcommand("predict", "Predict next-step prices with a checkpoint");
  add_run_options(predict, o);
  predict->add_option("--checkpoint", o.checkpoint, "Override data.checkpoint");
  auto* experiment = app.add_subcommand("experiment", "Run interval, regime, sentiment or forget-gate experiments");
  add_run_options(experiment, o);
  std::string which;
  experiment->add_option("which", which, "interval | regime | sentiment | forget-gate | all")->required();

  auto* generate = app.add_subcommand("generate", "Write a synthetic fixture with a starter config");
  std::string fixture;
  std::uint64_t gen_seed = 1;
  std::string gen_out = "fixture";
  generate->add_option("fixture", fixture, "sine | trend | ar8 | regime")->required();
  generate->add_option("--seed", gen_seed, "Generator seed");
  generate->add_option("--out", gen_out, "Output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 1;
  }

  const Io io{out, err};
  try {
    if (generate->parsed()) {
      cmd_generate(fixture, gen_seed, gen_out, io);
      return 0;
    }
    const auto config = resolve(o);
    if (features->parsed()) cmd_features(config, io);
    if (train_cmd->parsed()) cmd_train(config, io);
    if (predict->parsed()) cmd_predict(config, io);
    if (experiment->parsed()) cmd_experiment(config, which, io);
    return 0;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return 1;
  } catch (const DivergenceError& e) {
    err << "diverged: " << e.what() << "\n";
    return 3;
  } catch (const DataError& e) {
    err << "data error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }
}

}  // namespace trendlab::cli
