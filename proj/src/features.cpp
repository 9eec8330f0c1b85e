#include "trendlab/features.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>

#include "trendlab/error.hpp"
#include "trendlab/text.hpp"

namespace trendlab {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string format_field(double v) { return std::isnan(v) ? std::string() : text::format_double(v); }

}  // namespace

FeatureFrame FeatureFrame::slice(Date first, Date last) const {
  if (dates.size() != rows.size()) throw DataError("frame has no dates to slice on");
  FeatureFrame out;
  out.layout = layout;
  out.sentiment_defaulted = sentiment_defaulted;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (dates[i] < first || last < dates[i]) continue;
    out.dates.push_back(dates[i]);
    out.rows.push_back(rows[i]);
  }
  // The answer of the final row points past the slice.
  if (!out.rows.empty()) out.rows.back().answer = kNaN;
  return out;
}

SentimentSeries parse_sentiment_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || text::trim(line) != "Date,Sentiment")
    throw DataError("line 1: sentiment header must be 'Date,Sentiment'");
  SentimentSeries out;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (text::trim(line).empty()) continue;
    const auto fail = [&](const std::string& msg) {
      return DataError("sentiment line " + std::to_string(line_no) + ": " + msg);
    };
    const auto fields = text::split_csv(line);
    if (fields.size() != 2) throw fail("expected 2 fields");
    Date date;
    try {
      date = Date::parse(text::trim(fields[0]));
    } catch (const DataError& e) {
      throw fail(e.what());
    }
    const auto score = text::parse_double(fields[1]);
    if (!score || *score < 0.0 || *score > 1.0) throw fail("score must be a number in [0, 1]");
    if (!out.emplace(date, *score).second) throw fail("duplicate date " + date.iso());
  }
  return out;
}

void write_sentiment_csv(std::ostream& out, const SentimentSeries& sentiment) {
  out << "Date,Sentiment\n";
  for (const auto& [date, score] : sentiment) out << date.iso() << ',' << text::format_double(score) << '\n';
}

SentimentSeries resample_sentiment_weekly(const SentimentSeries& daily) {
  SentimentSeries out;
  for (const auto& [date, score] : daily) out[date.week_start()] = score;
  return out;
}

FrameBuild build_feature_frame(const PriceSeries& series, const IndicatorConfig& indicators,
                               const SentimentSeries* sentiment) {
  indicators.validate();
  if (series.size() < 2) throw DataError("series too short for TDD");
  // Frame covers bars 1..n-1 (bar 0 has no TDD); indicators are computed on that span.
  std::vector<PriceBar> tail(series.bars().begin() + 1, series.bars().end());
  const PriceSeries span(series.symbol(), series.interval(), std::move(tail));
  const std::size_t warmup =
      std::max({indicators.rsi_period, indicators.cci_period - 1, indicators.macd_slow - 1});
  if (span.size() <= warmup)
    throw DataError("indicator warm-up (" + std::to_string(warmup + 1) +
                    " bars) exhausts the series of " + std::to_string(series.size()) + " bars");

  const auto tdd = compute_tdd(series);
  const auto r = rsi(span, indicators.rsi_period);
  const auto c = cci(span, indicators.cci_period, indicators.cci_constant);
  const auto m = macd(span, indicators.macd_fast, indicators.macd_slow);

  FrameBuild build;
  build.warmup_trimmed = warmup + 1;
  auto& frame = build.frame;
  frame.layout = FeatureLayout::index;
  frame.sentiment_defaulted = sentiment == nullptr;
  for (std::size_t i = warmup; i < span.size(); ++i) {
    const auto& bar = span[i];
    FeatureRow row;
    row.fundamental = {bar.adjusted, static_cast<double>(bar.volume), tdd[i]};
    row.technical = {r.at(i), c.at(i), m.at(i)};
    if (sentiment) {
      const auto it = sentiment->find(bar.date);
      if (it == sentiment->end())
        throw DataError("no sentiment score for " + bar.date.iso() + " (unjoinable dates)");
      row.sentiment = it->second;
    }
    row.answer = i + 1 < span.size() ? span[i + 1].adjusted : kNaN;
    frame.dates.push_back(bar.date);
    frame.rows.push_back(std::move(row));
  }
  return build;
}

void write_feature_csv(std::ostream& out, const FeatureFrame& frame) {
  out << (frame.layout == FeatureLayout::index ? kIndexFeatureHeader : kCompanyFeatureHeader)
      << '\n';
  for (const auto& row : frame.rows) {
    for (double v : row.fundamental) out << format_field(v) << ',';
    for (double v : row.technical) out << format_field(v) << ',';
    out << format_field(row.sentiment) << ',' << format_field(row.answer) << '\n';
  }
}

FeatureFrame parse_feature_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw DataError("missing feature header");
  FeatureFrame frame;
  const auto header = text::trim(line);
  if (header == kIndexFeatureHeader) {
    frame.layout = FeatureLayout::index;
  } else if (header == kCompanyFeatureHeader) {
    frame.layout = FeatureLayout::company;
  } else {
    throw DataError("line 1: unrecognized feature header");
  }
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (text::trim(line).empty()) continue;
    const auto fail = [&](const std::string& msg) {
      return DataError("line " + std::to_string(line_no) + ": " + msg);
    };
    const auto fields = text::split_csv(line);
    if (fields.size() != 8) throw fail("expected 8 fields");
    double v[8];
    for (std::size_t k = 0; k < 8; ++k) {
      if (k == 7 && text::trim(fields[k]).empty()) {
        v[k] = kNaN;
        continue;
      }
      const auto parsed = text::parse_double(fields[k]);
      if (!parsed) throw fail("unparseable number '" + std::string(fields[k]) + "'");
      v[k] = *parsed;
    }
    if (v[6] < 0.0 || v[6] > 1.0) throw fail("sentiment must lie in [0, 1]");
    frame.rows.push_back(FeatureRow{{v[0], v[1], v[2]}, {v[3], v[4], v[5]}, v[6], v[7]});
  }
  if (frame.rows.empty()) throw DataError("feature file has no rows");
  for (std::size_t i = 0; i + 1 < frame.rows.size(); ++i)
    if (std::isnan(frame.rows[i].answer))
      throw DataError("missing Answer on row " + std::to_string(i + 2) +
                      " (only the last row may omit it)");
  return frame;
}

double ColumnTransform::apply(double x) const {
  switch (kind) {
    case Kind::price:
    case Kind::minmax:
      return ((x - min) - (max - x)) / (max - min);
    case Kind::delta:
      return 2.0 * x / (max - min);
    case Kind::constant:
      return 0.0;
    case Kind::identity:
      break;
  }
  return x;
}

std::string_view to_string(ColumnTransform::Kind kind) {
  switch (kind) {
    case ColumnTransform::Kind::price: return "price";
    case ColumnTransform::Kind::delta: return "delta";
    case ColumnTransform::Kind::minmax: return "minmax";
    case ColumnTransform::Kind::constant: return "constant";
    case ColumnTransform::Kind::identity: break;
  }
  return "identity";
}

ColumnTransform::Kind parse_column_kind(std::string_view text) {
  using K = ColumnTransform::Kind;
  for (K k : {K::price, K::delta, K::minmax, K::constant, K::identity})
    if (to_string(k) == text) return k;
  throw DataError("unknown column transform '" + std::string(text) + "'");
}

FeatureVector FeatureScaling::encode(const FeatureRow& row, bool with_sentiment) const {
  const std::size_t width = row.fundamental.size() + row.technical.size() + 1;
  if (columns.size() != width) throw DataError("feature width does not match the fitted scaling");
  FeatureVector out;
  out.reserve(width);
  std::size_t c = 0;
  for (double v : row.fundamental) out.push_back(columns[c++].apply(v));
  for (double v : row.technical) out.push_back(columns[c++].apply(v));
  if (with_sentiment) out.push_back(columns[c].apply(row.sentiment));
  return out;
}

namespace {

ColumnTransform fit_minmax(const std::vector<FeatureRow>& rows, std::size_t count,
                           const auto& get) {
  double lo = get(rows[0]), hi = lo;
  for (std::size_t i = 1; i < count; ++i) {
    lo = std::min(lo, get(rows[i]));
    hi = std::max(hi, get(rows[i]));
  }
  if (!(hi > lo)) return {ColumnTransform::Kind::constant, lo, hi};
  return {ColumnTransform::Kind::minmax, lo, hi};
}

}  // namespace

PreparedData prepare_dataset(const FeatureFrame& frame, const PrepareOptions& options) {
  if (options.window == 0) throw ConfigError("window must be positive");
  const std::size_t n = frame.rows.size();
  if (n <= options.window)
    throw DataError("insufficient rows: " + std::to_string(n) + " rows for window " +
                    std::to_string(options.window));
  const std::size_t windows = n - options.window;
  const std::size_t train_windows = train_count(windows, options.ratio);
  // Training windows read rows [0, train_windows + window - 1) and take their labels
  // from the answers of the same rows.
  const std::size_t fit_rows = options.fit_on_full_period ? n : train_windows + options.window - 1;

  std::vector<double> prices;
  for (std::size_t i = 0; i < fit_rows; ++i) {
    if (frame.layout == FeatureLayout::index) prices.push_back(frame.rows[i].fundamental[0]);
    if (!std::isnan(frame.rows[i].answer)) prices.push_back(frame.rows[i].answer);
  }
  PreparedData out;
  out.scaling.price = fit_scale(prices);
  const auto& price = out.scaling.price;

  const std::size_t d_a = frame.rows[0].fundamental.size();
  const std::size_t d_f = frame.rows[0].technical.size();
  for (std::size_t k = 0; k < d_a; ++k) {
    const auto get = [k](const FeatureRow& r) { return r.fundamental[k]; };
    if (frame.layout == FeatureLayout::index && k == 0) {
      out.scaling.columns.push_back({ColumnTransform::Kind::price, price.min(), price.max()});
    } else if (frame.layout == FeatureLayout::index && k == 2) {
      out.scaling.columns.push_back({ColumnTransform::Kind::delta, price.min(), price.max()});
    } else {
      out.scaling.columns.push_back(fit_minmax(frame.rows, fit_rows, get));
    }
  }
  for (std::size_t k = 0; k < d_f; ++k) {
    const auto get = [k](const FeatureRow& r) { return r.technical[k]; };
    out.scaling.columns.push_back(fit_minmax(frame.rows, fit_rows, get));
  }
  out.scaling.columns.push_back({ColumnTransform::Kind::identity, 0.0, 1.0});

  const auto rows = encode_rows(frame, out.scaling, options.with_sentiment);
  std::vector<double> labels(n, kNaN);
  for (std::size_t i = 1; i < n; ++i) labels[i] = normalize(frame.rows[i - 1].answer, price);
  out.dataset = make_windows(rows, labels, options.window, options.ratio);
  return out;
}

std::vector<FeatureVector> encode_rows(const FeatureFrame& frame, const FeatureScaling& scaling,
                                       bool with_sentiment) {
  std::vector<FeatureVector> rows;
  rows.reserve(frame.rows.size());
  for (const auto& r : frame.rows) rows.push_back(scaling.encode(r, with_sentiment));
  return rows;
}

}  // namespace trendlab
