#include "trendlab/market_data.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>

#include "trendlab/error.hpp"
#include "trendlab/text.hpp"

namespace trendlab {

std::string_view to_string(Interval interval) {
  return interval == Interval::daily ? "daily" : "weekly";
}

Interval parse_interval(std::string_view text) {
  if (text == "daily") return Interval::daily;
  if (text == "weekly") return Interval::weekly;
  throw ConfigError("unknown interval '" + std::string(text) + "' (expected daily|weekly)");
}

void validate_bar(const PriceBar& bar) {
  const auto where = [&] { return " at " + bar.date.iso(); };
  if (!(bar.low <= bar.high)) throw DataError("low above high" + where());
  if (!(bar.low <= bar.open && bar.open <= bar.high))
    throw DataError("open outside [low, high]" + where());
  if (!(bar.low <= bar.close && bar.close <= bar.high))
    throw DataError("close outside [low, high]" + where());
  if (!(bar.adjusted > 0.0)) throw DataError("adjusted price must be positive" + where());
}

PriceSeries::PriceSeries(std::string symbol, Interval interval, std::vector<PriceBar> bars)
    : symbol_(std::move(symbol)), interval_(interval), bars_(std::move(bars)) {
  if (bars_.empty()) throw DataError("empty series");
  for (std::size_t i = 0; i < bars_.size(); ++i) {
    validate_bar(bars_[i]);
    if (i > 0 && !(bars_[i - 1].date < bars_[i].date))
      throw DataError("dates not ascending at " + bars_[i].date.iso());
  }
}

std::vector<double> PriceSeries::adjusted() const {
  std::vector<double> out;
  out.reserve(bars_.size());
  for (const auto& b : bars_) out.push_back(b.adjusted);
  return out;
}

PriceSeries PriceSeries::slice(Date first, Date last) const {
  std::vector<PriceBar> picked;
  for (const auto& b : bars_)
    if (first <= b.date && b.date <= last) picked.push_back(b);
  if (picked.empty())
    throw DataError("no bars between " + first.iso() + " and " + last.iso());
  return PriceSeries(symbol_, interval_, std::move(picked));
}

PriceSeries parse_price_csv(std::istream& in, std::string symbol, Interval interval) {
  std::string line;
  if (!std::getline(in, line)) throw DataError("missing header");
  if (text::trim(line) != kPriceCsvHeader)
    throw DataError("line 1: header must be '" + std::string(kPriceCsvHeader) + "'");

  std::vector<PriceBar> bars;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (text::trim(line).empty()) continue;
    const auto fail = [&](const std::string& msg) {
      return DataError("line " + std::to_string(line_no) + ": " + msg);
    };
    const auto fields = text::split_csv(line);
    if (fields.size() != 7) throw fail("expected 7 fields, got " + std::to_string(fields.size()));
    PriceBar bar;
    try {
      bar.date = Date::parse(text::trim(fields[0]));
    } catch (const DataError& e) {
      throw fail(e.what());
    }
    double* targets[] = {&bar.open, &bar.high, &bar.low, &bar.close, &bar.adjusted};
    for (std::size_t k = 0; k < 5; ++k) {
      const auto v = text::parse_double(fields[k + 1]);
      if (!v) throw fail("unparseable number '" + std::string(fields[k + 1]) + "'");
      *targets[k] = *v;
    }
    const auto vol = text::parse_unsigned(fields[6]);
    if (!vol) throw fail("unparseable volume '" + std::string(fields[6]) + "'");
    bar.volume = *vol;
    try {
      validate_bar(bar);
    } catch (const DataError& e) {
      throw fail(e.what());
    }
    if (!bars.empty() && !(bars.back().date < bar.date)) throw fail("dates not ascending");
    bars.push_back(bar);
  }
  if (bars.empty()) throw DataError("empty series");
  return PriceSeries(std::move(symbol), interval, std::move(bars));
}

void write_price_csv(std::ostream& out, const PriceSeries& series) {
  out << kPriceCsvHeader << '\n';
  for (const auto& b : series.bars()) {
    out << b.date.iso() << ',' << text::format_double(b.open) << ','
        << text::format_double(b.high) << ',' << text::format_double(b.low) << ','
        << text::format_double(b.close) << ',' << text::format_double(b.adjusted) << ','
        << b.volume << '\n';
  }
}

PriceSeries resample_weekly(const PriceSeries& daily) {
  if (daily.interval() != Interval::daily) throw DataError("series is already weekly");
  std::vector<PriceBar> weeks;
  for (const auto& bar : daily.bars()) {
    const Date anchor = bar.date.week_start();
    if (weeks.empty() || weeks.back().date != anchor) {
      PriceBar w = bar;
      w.date = anchor;
      weeks.push_back(w);
      continue;
    }
    auto& w = weeks.back();
    w.high = std::max(w.high, bar.high);
    w.low = std::min(w.low, bar.low);
    w.close = bar.close;
    w.adjusted = bar.adjusted;
    w.volume += bar.volume;
  }
  return PriceSeries(daily.symbol(), Interval::weekly, std::move(weeks));
}

std::vector<double> compute_tdd(const PriceSeries& series) {
  if (series.size() < 2) throw DataError("series too short for TDD (need at least 2 bars)");
  std::vector<double> out(series.size() - 1);
  for (std::size_t i = 1; i < series.size(); ++i)
    out[i - 1] = series[i].adjusted - series[i - 1].adjusted;
  return out;
}

NormalizationScale::NormalizationScale(double min, double max) : min_(min), max_(max) {
  if (!std::isfinite(min) || !std::isfinite(max)) throw DataError("non-finite scale bounds");
  if (!(max > min)) throw DataError("degenerate normalization scale (max must exceed min)");
}

NormalizationScale fit_scale(std::span<const double> prices) {
  if (prices.empty()) throw DataError("cannot fit scale on empty data");
  const auto [lo, hi] = std::minmax_element(prices.begin(), prices.end());
  return NormalizationScale(*lo, *hi);
}

NormalizationScale fit_scale(const PriceSeries& series) {
  const auto adj = series.adjusted();
  return fit_scale(adj);
}

double normalize(double price, const NormalizationScale& scale) {
  // Differences against each extreme keep both endpoints exact.
  return ((price - scale.min()) - (scale.max() - price)) / (scale.max() - scale.min());
}

double denormalize(double value, const NormalizationScale& scale) {
  return (value * (scale.max() - scale.min()) + (scale.max() + scale.min())) / 2.0;
}

std::size_t train_count(std::size_t count, SplitRatio ratio) {
  if (ratio.train == 0) throw ConfigError("train ratio must be positive");
  const std::size_t parts = ratio.train + ratio.test;
  return (count * ratio.train + parts - 1) / parts;
}

WindowedDataset make_windows(const std::vector<FeatureVector>& rows, std::span<const double> labels,
                             std::size_t window, SplitRatio ratio) {
  if (window == 0) throw ConfigError("window must be positive");
  if (rows.size() != labels.size()) throw DataError("rows and labels are not aligned");
  if (rows.size() <= window)
    throw DataError("insufficient rows: " + std::to_string(rows.size()) + " rows for window " +
                    std::to_string(window));
  const std::size_t dim = rows.front().size();
  for (const auto& r : rows)
    if (r.size() != dim) throw DataError("feature rows have inconsistent width");

  WindowedDataset ds;
  ds.window = window;
  ds.input_dim = dim;
  const std::size_t count = rows.size() - window;
  ds.windows.reserve(count);
  for (std::size_t k = 0; k < count; ++k) {
    Window w;
    w.inputs.reserve(window * dim);
    for (std::size_t t = 0; t < window; ++t)
      w.inputs.insert(w.inputs.end(), rows[k + t].begin(), rows[k + t].end());
    w.label_index = k + window;
    w.label = labels[w.label_index];
    ds.windows.push_back(std::move(w));
  }
  ds.split_index = train_count(count, ratio);
  return ds;
}

}  // namespace trendlab
