#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "trendlab/date.hpp"

namespace trendlab {

enum class Interval { daily, weekly };

std::string_view to_string(Interval interval);
Interval parse_interval(std::string_view text);

struct PriceBar {
  Date date;
  double open = 0.0;
  double high = 0.0;
  double low = 0.0;
  double close = 0.0;
  double adjusted = 0.0;
  std::uint64_t volume = 0;
};

/// Throws DataError when the OHLC ordering or the adjusted > 0 rule is violated.
void validate_bar(const PriceBar& bar);

/// Non-empty, strictly date-ascending list of validated bars.
class PriceSeries {
 public:
  PriceSeries(std::string symbol, Interval interval, std::vector<PriceBar> bars);

  const std::string& symbol() const { return symbol_; }
  Interval interval() const { return interval_; }
  const std::vector<PriceBar>& bars() const { return bars_; }
  std::size_t size() const { return bars_.size(); }
  const PriceBar& operator[](std::size_t i) const { return bars_[i]; }

  std::vector<double> adjusted() const;
  /// Bars with `first <= date <= last`; throws DataError if none fall inside.
  PriceSeries slice(Date first, Date last) const;

 private:
  std::string symbol_;
  Interval interval_;
  std::vector<PriceBar> bars_;
};

inline constexpr std::string_view kPriceCsvHeader = "Date,Open,High,Low,Close,Adj Close,Volume";

/// Reads the `Date,Open,High,Low,Close,Adj Close,Volume` export format.
/// Errors carry the 1-based line number of the offending row.
PriceSeries parse_price_csv(std::istream& in, std::string symbol = "",
                            Interval interval = Interval::daily);
void write_price_csv(std::ostream& out, const PriceSeries& series);

/// Aggregates a daily series into Monday-anchored calendar weeks.
PriceSeries resample_weekly(const PriceSeries& daily);

/// Trend deterministic data: first differences of the adjusted price.
std::vector<double> compute_tdd(const PriceSeries& series);

/// Min/max of the fit period; the degenerate max == min case is rejected.
class NormalizationScale {
 public:
  NormalizationScale(double min, double max);
  double min() const { return min_; }
  double max() const { return max_; }
  friend bool operator==(const NormalizationScale&, const NormalizationScale&) = default;

 private:
  double min_;
  double max_;
};

NormalizationScale fit_scale(const PriceSeries& series);
NormalizationScale fit_scale(std::span<const double> prices);

/// (2p - (max + min)) / (max - min). Not clamped: prices outside the fit range
/// map outside [-1, 1].
double normalize(double price, const NormalizationScale& scale);
double denormalize(double value, const NormalizationScale& scale);

/// Inclusive calendar span.
struct Segment {
  Date first;
  Date last;
};

struct SplitRatio {
  std::size_t train = 15;
  std::size_t test = 1;
};

/// Number of training windows out of `count` (rounded up toward training).
std::size_t train_count(std::size_t count, SplitRatio ratio);

using FeatureVector = std::vector<double>;

struct Window {
  std::vector<double> inputs;  // row-major, window x input_dim
  double label = 0.0;
  std::size_t label_index = 0;  // row index of the label in the source frame
};

/// Sliding windows (stride 1) with next-step labels and a chronological split.
struct WindowedDataset {
  std::size_t window = 0;
  std::size_t input_dim = 0;
  std::vector<Window> windows;
  std::size_t split_index = 0;

  std::span<const Window> train() const { return {windows.data(), split_index}; }
  std::span<const Window> test() const {
    return {windows.data() + split_index, windows.size() - split_index};
  }
  std::span<const double> row(const Window& w, std::size_t t) const {
    return {w.inputs.data() + t * input_dim, input_dim};
  }
};

/// Window k covers rows [k, k + window) and is labelled with labels[k + window];
/// labels[0, window) are never read.
WindowedDataset make_windows(const std::vector<FeatureVector>& rows, std::span<const double> labels,
                             std::size_t window, SplitRatio ratio = {});

}  // namespace trendlab
