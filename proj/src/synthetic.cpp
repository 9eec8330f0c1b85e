#include "trendlab/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "trendlab/error.hpp"

namespace trendlab::synthetic {

namespace {

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  double normal() {
    // Box-Muller keeps the stream independent of the standard library's distributions.
    const double u1 = std::max(uniform(), 0x1.0p-53);
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

 private:
  std::mt19937_64 engine_;
};

Date next_business_day(Date d) {
  d = d + 1;
  while (std::chrono::weekday{d.days()}.iso_encoding() > 5) d = d + 1;
  return d;
}

}  // namespace

PriceSeries bars_from_path(std::span<const double> path, Date start, Interval interval,
                           std::uint64_t seed, std::string_view symbol) {
  if (path.empty()) throw DataError("empty price path");
  Rng rng(seed ^ 0x5851f42d4c957f2dULL);
  std::vector<PriceBar> bars;
  bars.reserve(path.size());
  Date date = interval == Interval::weekly ? start.week_start() : start;
  if (interval == Interval::daily && std::chrono::weekday{date.days()}.iso_encoding() > 5)
    date = next_business_day(date);
  double prev = path[0];
  for (std::size_t t = 0; t < path.size(); ++t) {
    PriceBar b;
    b.date = date;
    b.close = b.adjusted = path[t];
    b.open = prev;
    b.high = std::max(b.open, b.close) * (1.0 + rng.uniform(0.0, 0.004));
    b.low = std::min(b.open, b.close) * (1.0 - rng.uniform(0.0, 0.004));
    b.volume = static_cast<std::uint64_t>(1'000'000.0 * rng.uniform(0.8, 1.2));
    bars.push_back(b);
    prev = path[t];
    date = interval == Interval::weekly ? date + 7 : next_business_day(date);
  }
  return PriceSeries(std::string(symbol), interval, std::move(bars));
}

PriceSeries sine(std::size_t bars, double period, double amplitude) {
  std::vector<double> path(bars);
  for (std::size_t t = 0; t < bars; ++t)
    path[t] = 100.0 + amplitude * std::sin(2.0 * std::numbers::pi * static_cast<double>(t) / period);
  return bars_from_path(path, Date(2015, 1, 5), Interval::daily, 7, "SINE");
}

PriceSeries trend_seasonality(std::uint64_t seed, std::size_t days) {
  Rng rng(seed);
  std::vector<double> path(days);
  double transient = 0.0;
  for (std::size_t t = 0; t < days; ++t) {
    const double x = static_cast<double>(t);
    const double smooth = 0.00025 * x + 0.08 * std::sin(2.0 * std::numbers::pi * x / 252.0) +
                          0.03 * std::sin(2.0 * std::numbers::pi * x / 63.0);
    transient = 0.5 * transient + 0.012 * rng.normal();
    path[t] = 100.0 * std::exp(smooth + transient);
  }
  return bars_from_path(path, Date(2000, 1, 3), Interval::daily, seed, "TRND");
}

PriceSeries ar8(std::uint64_t seed, std::size_t bars) {
  // Geometric weights over 8 lags, sum 0.95: persistent but stationary.
  constexpr std::size_t kOrder = 8;
  double phi[kOrder];
  double total = 0.0;
  for (std::size_t k = 0; k < kOrder; ++k) total += phi[k] = std::pow(0.8, static_cast<double>(k));
  for (double& p : phi) p *= 0.95 / total;

  Rng rng(seed);
  const std::size_t burn = 200;
  std::vector<double> x(bars + burn, 0.0);
  for (std::size_t t = kOrder; t < x.size(); ++t) {
    double v = rng.normal();
    for (std::size_t k = 0; k < kOrder; ++k) v += phi[k] * x[t - 1 - k];
    x[t] = v;
  }
  std::vector<double> path(bars);
  for (std::size_t t = 0; t < bars; ++t) path[t] = 100.0 + 2.0 * x[t + burn];
  return bars_from_path(path, Date(2005, 1, 3), Interval::daily, seed, "AR8");
}

namespace {

std::vector<double> regime_path(Rng& rng, RegimeShape shape, std::size_t days, double start) {
  const double drift = shape == RegimeShape::bull ? 0.0012 : shape == RegimeShape::bear ? -0.0012 : 0.0;
  std::vector<double> path(days);
  double level = std::log(start);
  double transient = 0.0;
  for (std::size_t t = 0; t < days; ++t) {
    level += drift;
    if (shape == RegimeShape::flat)
      level = std::log(start) +
              0.04 * (std::cos(2.0 * std::numbers::pi * static_cast<double>(t) / 50.0) - 1.0);
    transient = 0.5 * transient + 0.01 * rng.normal();
    path[t] = std::exp(level + transient);
  }
  return path;
}

}  // namespace

PriceSeries regime(std::uint64_t seed, RegimeShape shape, std::size_t days, Date start) {
  Rng rng(seed);
  const auto path = regime_path(rng, shape, days, 100.0);
  return bars_from_path(path, start, Interval::daily, seed, "REG");
}

RegimeFixture regime_sequence(std::uint64_t seed, std::size_t days) {
  Rng rng(seed);
  std::vector<double> path;
  double level = 100.0;
  for (auto shape : {RegimeShape::bear, RegimeShape::flat, RegimeShape::bull}) {
    const auto part = regime_path(rng, shape, days, level);
    path.insert(path.end(), part.begin(), part.end());
    level = part.back();
  }
  auto series = bars_from_path(path, Date(2000, 1, 3), Interval::daily, seed, "REG");
  RegimeFixture out{std::move(series), {}};
  for (std::size_t s = 0; s < 3; ++s)
    out.segments.push_back({out.series[s * days].date, out.series[(s + 1) * days - 1].date});
  return out;
}

SentimentSeries leading_sentiment(const PriceSeries& series, std::uint64_t seed, double strength,
                                  double noise) {
  Rng rng(seed ^ 0xa0761d6478bd642fULL);
  const auto tdd = compute_tdd(series);
  double typical = 0.0;
  for (double d : tdd) typical += std::abs(d);
  typical = std::max(typical / static_cast<double>(tdd.size()), 1e-12);
  SentimentSeries out;
  for (std::size_t t = 0; t < series.size(); ++t) {
    const double next = t < tdd.size() ? tdd[t] : 0.0;
    const double score = 0.5 + strength * std::tanh(next / typical) + rng.uniform(-noise, noise);
    out.emplace(series[t].date, std::clamp(score, 0.0, 1.0));
  }
  return out;
}

SentimentSeries noise_sentiment(const PriceSeries& series, std::uint64_t seed) {
  Rng rng(seed ^ 0xe7037ed1a0b428dbULL);
  SentimentSeries out;
  for (const auto& b : series.bars()) out.emplace(b.date, rng.uniform());
  return out;
}

}  // namespace trendlab::synthetic
