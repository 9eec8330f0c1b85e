#include "trendlab/indicators.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "trendlab/error.hpp"

namespace trendlab {

void IndicatorConfig::validate() const {
  if (rsi_period < 2 || cci_period < 2 || macd_fast < 2 || macd_slow < 2 || macd_signal < 2)
    throw ConfigError("indicator periods must be at least 2");
  if (macd_fast >= macd_slow) throw ConfigError("macd_fast must be smaller than macd_slow");
  if (!(cci_constant > 0.0) || !std::isfinite(cci_constant))
    throw ConfigError("cci_constant must be positive");
}

namespace {

void require_length(const PriceSeries& series, std::size_t needed, const char* name) {
  if (series.size() < needed)
    throw DataError(std::string("series too short for ") + name + ": need " +
                    std::to_string(needed) + " bars, have " + std::to_string(series.size()));
}

}  // namespace

IndicatorSeries rsi(const PriceSeries& series, std::size_t period) {
  if (period < 1) throw ConfigError("rsi period must be positive");
  require_length(series, period + 1, "RSI");
  const auto& bars = series.bars();
  const auto value = [](double gain, double loss) {
    if (loss == 0.0) return gain == 0.0 ? 50.0 : 100.0;
    return 100.0 - 100.0 / (1.0 + gain / loss);
  };

  double gain = 0.0, loss = 0.0;
  for (std::size_t i = 1; i <= period; ++i) {
    const double d = bars[i].adjusted - bars[i - 1].adjusted;
    gain += std::max(d, 0.0);
    loss += std::max(-d, 0.0);
  }
  gain /= static_cast<double>(period);
  loss /= static_cast<double>(period);

  IndicatorSeries out{period, {}};
  out.values.reserve(bars.size() - period);
  out.values.push_back(value(gain, loss));
  const double p = static_cast<double>(period);
  for (std::size_t i = period + 1; i < bars.size(); ++i) {
    const double d = bars[i].adjusted - bars[i - 1].adjusted;
    gain = (gain * (p - 1.0) + std::max(d, 0.0)) / p;
    loss = (loss * (p - 1.0) + std::max(-d, 0.0)) / p;
    out.values.push_back(value(gain, loss));
  }
  return out;
}

IndicatorSeries cci(const PriceSeries& series, std::size_t period, double constant) {
  if (period < 1) throw ConfigError("cci period must be positive");
  if (!(constant > 0.0)) throw ConfigError("cci constant must be positive");
  require_length(series, period, "CCI");
  std::vector<double> tp;
  tp.reserve(series.size());
  for (const auto& b : series.bars()) tp.push_back((b.high + b.low + b.close) / 3.0);

  IndicatorSeries out{period - 1, {}};
  const double n = static_cast<double>(period);
  for (std::size_t t = period - 1; t < tp.size(); ++t) {
    const std::size_t first = t + 1 - period;
    double sum = 0.0, peak = 0.0;
    for (std::size_t j = first; j <= t; ++j) {
      sum += tp[j];
      peak = std::max(peak, std::abs(tp[j]));
    }
    const double sma = sum / n;
    double mad = 0.0;
    for (std::size_t j = first; j <= t; ++j) mad += std::abs(tp[j] - sma);
    mad /= n;
    // Rounding in the SMA leaves a residue of a few ulps on flat windows.
    if (mad <= 1e-12 * peak) {
      out.values.push_back(0.0);
    } else {
      out.values.push_back((tp[t] - sma) / (constant * mad));
    }
  }
  return out;
}

std::vector<double> ema(const std::vector<double>& xs, std::size_t n) {
  if (n < 1) throw ConfigError("ema period must be positive");
  if (xs.size() < n) throw DataError("series too short for EMA");
  const double alpha = 2.0 / (static_cast<double>(n) + 1.0);
  double seed = 0.0;
  for (std::size_t i = 0; i < n; ++i) seed += xs[i];
  seed /= static_cast<double>(n);
  std::vector<double> out;
  out.reserve(xs.size() - n + 1);
  out.push_back(seed);
  for (std::size_t i = n; i < xs.size(); ++i)
    out.push_back(alpha * xs[i] + (1.0 - alpha) * out.back());
  return out;
}

IndicatorSeries macd(const PriceSeries& series, std::size_t fast, std::size_t slow) {
  if (fast >= slow) throw ConfigError("macd fast period must be smaller than slow period");
  require_length(series, slow, "MACD");
  const auto adj = series.adjusted();
  const auto ema_fast = ema(adj, fast);
  const auto ema_slow = ema(adj, slow);
  IndicatorSeries out{slow - 1, {}};
  out.values.reserve(ema_slow.size());
  for (std::size_t i = 0; i < ema_slow.size(); ++i)
    out.values.push_back(ema_fast[i + (slow - fast)] - ema_slow[i]);
  return out;
}

IndicatorSeries macd_signal(const PriceSeries& series, std::size_t fast, std::size_t slow,
                            std::size_t signal) {
  const auto line = macd(series, fast, slow);
  if (line.values.size() < signal) throw DataError("series too short for MACD signal line");
  return {line.offset + signal - 1, ema(line.values, signal)};
}

}  // namespace trendlab
