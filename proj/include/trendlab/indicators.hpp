#pragma once

#include <cstddef>
#include <vector>

#include "trendlab/market_data.hpp"

namespace trendlab {

struct IndicatorConfig {
  std::size_t rsi_period = 14;
  std::size_t cci_period = 20;
  double cci_constant = 0.015;
  std::size_t macd_fast = 12;
  std::size_t macd_slow = 26;
  std::size_t macd_signal = 9;

  /// Throws ConfigError unless every period is >= 2, fast < slow and the constant is positive.
  void validate() const;
};

/// Indicator values aligned to bars: values[i] belongs to bar `offset + i`.
struct IndicatorSeries {
  std::size_t offset = 0;
  std::vector<double> values;

  double at(std::size_t bar) const { return values.at(bar - offset); }
  std::size_t end() const { return offset + values.size(); }
};

/// Wilder-smoothed relative strength index on adjusted prices, defined from bar `period`.
IndicatorSeries rsi(const PriceSeries& series, std::size_t period);

/// Commodity channel index on the typical price (high + low + close) / 3, defined
/// from bar `period - 1`. A zero mean deviation yields 0.
IndicatorSeries cci(const PriceSeries& series, std::size_t period, double constant);

/// EMA(fast) - EMA(slow) of adjusted prices, each EMA seeded with the SMA of its
/// first n values. Defined from bar `slow - 1`.
IndicatorSeries macd(const PriceSeries& series, std::size_t fast, std::size_t slow);

/// EMA(signal) of the MACD line.
IndicatorSeries macd_signal(const PriceSeries& series, std::size_t fast, std::size_t slow,
                            std::size_t signal);

/// SMA-seeded exponential moving average with factor 2 / (n + 1); values[i] is at index n - 1 + i.
std::vector<double> ema(const std::vector<double>& xs, std::size_t n);

}  // namespace trendlab
