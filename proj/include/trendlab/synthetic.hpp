#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>

#include "trendlab/features.hpp"
#include "trendlab/market_data.hpp"

// Seeded generators for the synthetic fixtures used by tests and the experiment harness.
namespace trendlab::synthetic {

/// Wraps an adjusted-price path into business-day (or weekly) bars starting at `start`.
/// Open is the previous close, high/low add a seeded intrabar range, volume is seeded.
PriceSeries bars_from_path(std::span<const double> path, Date start, Interval interval,
                           std::uint64_t seed, std::string_view symbol = "SYN");

/// Noiseless sine: 100 + amplitude * sin(2 pi t / period).
PriceSeries sine(std::size_t bars, double period = 16.0, double amplitude = 10.0);

/// Business-day series with exponential trend, yearly and quarterly seasonality and
/// transient day-level noise that decays within the week.
PriceSeries trend_seasonality(std::uint64_t seed, std::size_t days = 2600);

/// Stationary AR(8) level process around 100.
PriceSeries ar8(std::uint64_t seed, std::size_t bars = 600);

enum class RegimeShape { bull, bear, flat };

/// Daily path with a linear drift of the given sign (flat: oscillation, no drift).
PriceSeries regime(std::uint64_t seed, RegimeShape shape, std::size_t days = 500,
                   Date start = Date(2010, 1, 4));

/// Concatenation of bear, flat and bull segments of `days` business days each.
struct RegimeFixture {
  PriceSeries series;
  std::vector<Segment> segments;  // bear, flat, bull
};
RegimeFixture regime_sequence(std::uint64_t seed, std::size_t days = 500);

/// Sentiment whose score at t leans toward the sign of the next adjusted-price change.
/// `strength` scales the signal, `noise` is the uniform noise half-width.
SentimentSeries leading_sentiment(const PriceSeries& series, std::uint64_t seed,
                                  double strength = 0.4, double noise = 0.1);

/// Independent uniform scores in [0, 1].
SentimentSeries noise_sentiment(const PriceSeries& series, std::uint64_t seed);

}  // namespace trendlab::synthetic
