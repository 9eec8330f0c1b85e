#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "trendlab/error.hpp"
#include "trendlab/market_data.hpp"
#include "trendlab/text.hpp"

using namespace trendlab;

TEST_SUITE("market_data") {

TEST_CASE("dates parse, print and anchor weeks on Monday") {
  const auto d = Date::parse("2010-07-08");
  CHECK(d.iso() == "2010-07-08");
  CHECK(d.week_start() == Date(2010, 7, 5));
  CHECK(Date(2010, 7, 5).week_start() == Date(2010, 7, 5));
  CHECK(Date(2010, 7, 11).week_start() == Date(2010, 7, 5));
  CHECK(Date(2010, 7, 12) - Date(2010, 7, 5) == 7);
  CHECK_THROWS_AS(Date::parse("2010-02-30"), DataError);
  CHECK_THROWS_AS(Date::parse("20100228"), DataError);
}

TEST_CASE("text helpers") {
  CHECK(text::format_double(0.1) == "0.1");
  CHECK(text::parse_double(text::format_double(1.0 / 3.0)) == 1.0 / 3.0);
  CHECK_FALSE(text::parse_double("nan"));
  CHECK_FALSE(text::parse_double("1.5x"));
  CHECK(text::split_csv("a,b,,c\r").size() == 4);
  CHECK(text::trim("  x \t") == "x");
}

TEST_CASE("first sample-table row parses") {
  const auto s = fixtures::table3();
  REQUIRE(s.size() == 9);
  CHECK(s[0].date == Date(2010, 6, 28));
  CHECK(s[0].adjusted == 1728.339966);
  CHECK(s[0].volume == 6610950000ULL);
}

TEST_CASE("price csv errors") {
  const std::string header = std::string(kPriceCsvHeader) + "\n";
  SUBCASE("empty body") {
    std::istringstream in(header);
    CHECK_THROWS_WITH_AS(parse_price_csv(in), doctest::Contains("empty series"), DataError);
  }
  SUBCASE("descending dates") {
    std::istringstream in(header + "2010-07-05,1,2,1,1,1,10\n2010-06-28,1,2,1,1,1,10\n");
    CHECK_THROWS_WITH_AS(parse_price_csv(in), doctest::Contains("dates not ascending"), DataError);
  }
  SUBCASE("line numbers in messages") {
    std::istringstream in(header + "2010-07-05,1,2,1,1,1,10\n2010-07-06,1,0.5,1,1,1,10\n");
    CHECK_THROWS_WITH_AS(parse_price_csv(in), doctest::Contains("line 3"), DataError);
  }
  SUBCASE("non-positive adjusted price") {
    std::istringstream in(header + "2010-07-05,1,2,1,1,0,10\n");
    CHECK_THROWS_AS(parse_price_csv(in), DataError);
  }
}

TEST_CASE("price csv round trip") {
  const auto s = fixtures::f1();
  std::ostringstream out;
  write_price_csv(out, s);
  std::istringstream in(out.str());
  const auto back = parse_price_csv(in, "F1");
  REQUIRE(back.size() == s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    CHECK(back[i].date == s[i].date);
    CHECK(back[i].adjusted == s[i].adjusted);
    CHECK(back[i].volume == s[i].volume);
  }
}

TEST_CASE("weekly resampling") {
  const double highs[] = {3, 7, 5, 6, 4};
  std::vector<PriceBar> bars;
  for (int d = 0; d < 5; ++d) bars.push_back({Date(2021, 3, 1) + d, 2, highs[d], 1, 2, 2, 100});
  const auto w = resample_weekly(PriceSeries("X", Interval::daily, bars));
  REQUIRE(w.size() == 1);
  CHECK(w[0].high == 7);
  CHECK(w[0].volume == 500);
  CHECK(w.interval() == Interval::weekly);

  SUBCASE("single bar week keeps the bar") {
    const auto one = resample_weekly(PriceSeries("X", Interval::daily, {bars[2]}));
    CHECK(one[0].volume == 100);
    CHECK(one[0].adjusted == bars[2].adjusted);
    CHECK(one[0].date == Date(2021, 3, 1));
  }

  SUBCASE("two weeks of business days against a brute-force sum") {
    const auto f1 = fixtures::f1();
    const auto ten = f1.slice(f1[0].date, f1[9].date);
    const auto weeks = resample_weekly(ten);
    REQUIRE(weeks.size() == 2);
    for (const auto& wk : weeks.bars()) {
      std::uint64_t vol = 0;
      double hi = 0, lo = 1e300, last = 0;
      for (const auto& b : ten.bars())
        if (b.date.week_start() == wk.date) {
          vol += b.volume;
          hi = std::max(hi, b.high);
          lo = std::min(lo, b.low);
          last = b.adjusted;
        }
      CHECK(wk.volume == vol);
      CHECK(wk.high == hi);
      CHECK(wk.low == lo);
      CHECK(wk.adjusted == last);
    }
  }

  CHECK_THROWS_AS(resample_weekly(w), DataError);
}

TEST_CASE("TDD reproduces the sample table column") {
  const auto tdd = compute_tdd(fixtures::table3());
  const double printed[] = {86.450073, -11.310059, 71.900025, -11.380005,
                            38.880005, -84.079956, 6.949951, -34.109985};
  REQUIRE(tdd.size() == 8);
  for (std::size_t i = 0; i < 8; ++i) CHECK(std::round(tdd[i] * 1e6) / 1e6 == printed[i]);
  CHECK(compute_tdd(fixtures::series_from({5, 5, 5})) == std::vector<double>{0, 0});
}

TEST_CASE("normalization scale") {
  const auto scale = fit_scale(fixtures::table3());
  CHECK(scale.min() == 1728.339966);
  CHECK(scale.max() == 1902.880005);
  CHECK(fit_scale(std::vector<double>{1, 2}) == NormalizationScale(1, 2));
  CHECK_THROWS_AS(fit_scale(fixtures::series_from({3, 3, 3})), DataError);

  const NormalizationScale k(1000, 2000);
  CHECK(normalize(1500, k) == 0.0);
  CHECK(normalize(2000, k) == 1.0);
  CHECK(normalize(1000, k) == -1.0);
  CHECK(denormalize(1, k) == 2000);
  CHECK(denormalize(0, k) == 1500);
  CHECK(normalize(2500, k) == 2.0);  // unclamped

  CHECK(normalize(1728.339966, scale) == -1.0);
  CHECK(normalize(1902.880005, scale) == 1.0);
  const double v = normalize(1814.790039, scale);
  CHECK(std::abs(v - oracle::normalize(1814.790039, 1728.339966, 1902.880005)) <= 1e-9);
  CHECK(v == doctest::Approx(-0.009395).epsilon(1e-3));
  CHECK(denormalize(-0.009395, scale) == doctest::Approx(1814.79).epsilon(1e-5));
}

TEST_CASE("normalization round trip over random pairs") {
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 1000; ++trial) {
    const double lo = 1.0 + 5000.0 * u(rng);
    const double hi = lo + 0.01 + 3000.0 * u(rng);
    const double p = lo - 0.5 * (hi - lo) + 2.0 * (hi - lo) * u(rng);
    const NormalizationScale s(lo, hi);
    CHECK(std::abs(denormalize(normalize(p, s), s) - p) <= 1e-12 * std::abs(p));
    CHECK(normalize(lo, s) == -1.0);
    CHECK(normalize(hi, s) == 1.0);
  }
}

TEST_CASE("split ratio") {
  CHECK(train_count(16, {}) == 15);
  CHECK(train_count(160, {}) == 150);
  CHECK(train_count(1, {}) == 1);
  CHECK(train_count(10, {1, 1}) == 5);
}

TEST_CASE("window enumeration") {
  std::vector<FeatureVector> rows;
  std::vector<double> labels;
  for (int i = 0; i < 10; ++i) {
    rows.push_back({static_cast<double>(i)});
    labels.push_back(100.0 + i);
  }
  const auto ds = make_windows(rows, labels, 3);
  REQUIRE(ds.windows.size() == 7);
  for (std::size_t k = 0; k < 7; ++k) {
    CHECK(ds.windows[k].label_index == k + 3);
    CHECK(ds.windows[k].label == 100.0 + static_cast<double>(k + 3));
    CHECK(ds.windows[k].inputs == std::vector<double>{double(k), double(k + 1), double(k + 2)});
  }
  CHECK(ds.train().size() == 7);  // ceil(7 * 15 / 16)
  CHECK(ds.test().empty());
  CHECK_THROWS_AS(make_windows(rows, labels, 10), DataError);
}

TEST_CASE("training windows always precede test windows") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 5 + rng() % 300;
    const std::size_t w = 1 + rng() % (n - 1);
    std::vector<FeatureVector> rows(n, FeatureVector{0.0});
    std::vector<double> labels(n, 0.0);
    const auto ds = make_windows(rows, labels, w, {1 + rng() % 20, 1 + rng() % 4});
    std::size_t latest_train = 0;
    for (const auto& t : ds.train()) latest_train = std::max(latest_train, t.label_index);
    for (const auto& t : ds.test()) CHECK(t.label_index > latest_train);
  }
}

}  // TEST_SUITE
