#pragma once

#include <cstddef>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "trendlab/indicators.hpp"
#include "trendlab/market_data.hpp"

namespace trendlab {

/// Which fundamental stream a frame carries: index-level data (adjusted price,
/// volume, TDD) or company value ratios (PBR, PER, PSR).
enum class FeatureLayout { index, company };

inline constexpr const char* kIndexFeatureHeader =
    "Adj. Price,Trading Vol.,TDD,RSI,CCI,MACD,Sentiment,Answer";
inline constexpr const char* kCompanyFeatureHeader =
    "PBR,PER,PSR,RSI,CCI,MACD,Sentiment,Answer";

inline constexpr double kNeutralSentiment = 0.5;

struct FeatureRow {
  std::vector<double> fundamental;
  std::vector<double> technical;
  double sentiment = kNeutralSentiment;
  /// Adjusted price of the next step; NaN when unknown (the last row of a frame).
  double answer = 0.0;
};

struct FeatureFrame {
  FeatureLayout layout = FeatureLayout::index;
  std::vector<Date> dates;  // empty when loaded from a feature CSV
  std::vector<FeatureRow> rows;
  bool sentiment_defaulted = false;

  std::size_t size() const { return rows.size(); }
  /// Rows whose dates fall in [first, last]; requires dates.
  FeatureFrame slice(Date first, Date last) const;
};

using SentimentSeries = std::map<Date, double>;

/// Reads `Date,Sentiment` with scores in [0, 1].
SentimentSeries parse_sentiment_csv(std::istream& in);
void write_sentiment_csv(std::ostream& out, const SentimentSeries& sentiment);

/// Last score of each Monday-anchored week, keyed by the Monday (matches resample_weekly).
SentimentSeries resample_sentiment_weekly(const SentimentSeries& daily);

struct FrameBuild {
  FeatureFrame frame;
  std::size_t warmup_trimmed = 0;  // leading bars dropped (TDD + indicator warm-up)
};

/// Index-layout frame over the bars that have a TDD value, starting at the first bar
/// where RSI, CCI and MACD are all defined. Without sentiment every row gets the
/// neutral score and `sentiment_defaulted` is set.
FrameBuild build_feature_frame(const PriceSeries& series, const IndicatorConfig& indicators,
                               const SentimentSeries* sentiment = nullptr);

void write_feature_csv(std::ostream& out, const FeatureFrame& frame);
FeatureFrame parse_feature_csv(std::istream& in);

/// Per-column input transform, fitted on the training span.
struct ColumnTransform {
  enum class Kind { price, delta, minmax, constant, identity };
  Kind kind = Kind::identity;
  double min = 0.0;
  double max = 0.0;

  double apply(double x) const;
};

std::string_view to_string(ColumnTransform::Kind kind);
ColumnTransform::Kind parse_column_kind(std::string_view text);

struct FeatureScaling {
  NormalizationScale price{0.0, 1.0};
  std::vector<ColumnTransform> columns;  // fundamental, technical, then sentiment

  /// Scaled model input row; the sentiment column is dropped when `with_sentiment` is false.
  FeatureVector encode(const FeatureRow& row, bool with_sentiment) const;
};

struct PrepareOptions {
  std::size_t window = 12;
  SplitRatio ratio{};
  bool with_sentiment = true;
  /// Fit scales over every row instead of the training span only.
  bool fit_on_full_period = false;
};

struct PreparedData {
  WindowedDataset dataset;
  FeatureScaling scaling;
};

/// Scales the frame, then builds windows labelled with the normalized next-step
/// adjusted price. Scales are fitted on the rows and labels of training windows.
PreparedData prepare_dataset(const FeatureFrame& frame, const PrepareOptions& options);

/// Encodes every row with an existing scaling (inference path).
std::vector<FeatureVector> encode_rows(const FeatureFrame& frame, const FeatureScaling& scaling,
                                       bool with_sentiment);

}  // namespace trendlab
