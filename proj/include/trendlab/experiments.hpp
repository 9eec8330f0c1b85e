#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "trendlab/features.hpp"
#include "trendlab/indicators.hpp"
#include "trendlab/market_data.hpp"
#include "trendlab/training.hpp"

namespace trendlab {

enum class RegimeLabel { bull, bear, flat };

std::string_view to_string(RegimeLabel label);

/// Least-squares slope of the segment's adjusted prices, normalized to [-1, 1] with the
/// segment's own extrema, times the span (n - 1). Above +threshold is bull, below
/// -threshold bear, otherwise flat. Needs at least 8 bars.
RegimeLabel classify_regime(const PriceSeries& segment, double threshold = 0.15);

/// Fitted normalized change across the segment used by classify_regime.
double regime_slope(const PriceSeries& segment);

/// Bear 2000-02..2002-01, flat 2004-09..2006-08, bull 2013-08..2015-07 on the NASDAQ 100.
std::vector<Segment> nasdaq_regime_preset();

struct ExperimentConfig {
  TrainConfig train;
  IndicatorConfig indicators;
  std::size_t projected = 0;  // stream width after fusion; 0 = widest stream
  SplitRatio ratio{};
  bool fit_on_full_period = false;
  std::vector<std::uint64_t> seeds{1, 2, 3};
  double regime_threshold = 0.15;
  /// Wall time makes reports non-reproducible, so it is written as 0 unless enabled.
  bool record_wall_time = false;
  /// Worker threads for independent cells; 0 or 1 runs serially.
  std::size_t threads = 0;
};

/// Threads from TRENDLAB_THREADS (0 = serial); hardware concurrency when unset.
std::size_t threads_from_env();

struct ReportRow {
  std::string model;     // lstm | rnn
  std::string interval;  // daily | weekly
  std::string regime;    // bull | bear | flat | all
  std::string features;  // full | no-sentiment
  std::uint64_t seed = 0;
  double train_rmse = 0.0;
  double test_rmse = 0.0;
  double wall_ms = 0.0;
  std::string error;  // non-empty for a failed cell

  bool ok() const { return error.empty(); }
};

struct ExperimentReport {
  std::string experiment;  // interval | regime | sentiment
  std::vector<ReportRow> rows;

  const ReportRow* find(std::string_view model, std::string_view interval, std::string_view regime,
                        std::string_view features, std::uint64_t seed) const;
};

inline constexpr const char* kReportCsvHeader =
    "model,interval,regime,features,seed,train_rmse,test_rmse,wall_ms,error";

void write_report_csv(std::ostream& out, const ExperimentReport& report);
nlohmann::json report_to_json(const ExperimentReport& report);

/// Result of training one model on one frame.
struct CellResult {
  TrainingRun run;
  PreparedData data;
};

CellResult run_cell(const FeatureFrame& frame, CellKind cell, bool with_sentiment,
                    std::uint64_t seed, const ExperimentConfig& config);

/// LSTM and RNN on the daily series and on its weekly resampling, per seed.
ExperimentReport run_interval_experiment(const PriceSeries& daily, const SentimentSeries* sentiment,
                                         const ExperimentConfig& config);

/// Classifies each segment, then trains both models on it with a 15:1 split inside the segment.
/// Segments must span the same calendar length (within 7 days) and hold at least 8 bars.
ExperimentReport run_regime_experiment(const PriceSeries& series, const std::vector<Segment>& segments,
                                       const SentimentSeries* sentiment,
                                       const ExperimentConfig& config);

/// Both models with and without the sentiment stream. Requires real sentiment scores.
ExperimentReport run_sentiment_ablation(const PriceSeries& series, const SentimentSeries& sentiment,
                                        const ExperimentConfig& config);

struct ForgetGatePoint {
  std::size_t window = 0;
  std::uint64_t seed = 0;
  double mean_forget = 0.0;
  double test_rmse = 0.0;
};

/// One LSTM per window size; mean forget activation over the test windows.
std::vector<ForgetGatePoint> run_forget_gate_experiment(const PriceSeries& series,
                                                        const SentimentSeries* sentiment,
                                                        const std::vector<std::size_t>& windows,
                                                        const ExperimentConfig& config);

inline constexpr const char* kForgetGateCsvHeader = "window_size,seed,mean_forget,test_rmse";
void write_forget_gate_csv(std::ostream& out, const std::vector<ForgetGatePoint>& points);

struct AggregateRow {
  std::string model;
  std::string interval;
  std::string regime;
  std::string features;
  std::size_t count = 0;
  std::size_t failures = 0;
  double train_mean = 0.0;
  double train_std = 0.0;  // population convention
  double test_mean = 0.0;
  double test_std = 0.0;
};

/// Groups by (model, interval, regime, features) in lexicographic order; failed rows are
/// counted but excluded from the statistics. Reports must come from the same experiment.
std::vector<AggregateRow> aggregate_report(const std::vector<ExperimentReport>& reports);

inline constexpr const char* kAggregateCsvHeader =
    "model,interval,regime,features,count,failures,train_mean,train_std,test_mean,test_std";
void write_aggregate_csv(std::ostream& out, const std::vector<AggregateRow>& rows);

/// Runs `count` jobs on up to `threads` workers; job i writes only its own slot.
void parallel_for(std::size_t count, std::size_t threads, const std::function<void(std::size_t)>& job);

}  // namespace trendlab
