#pragma once

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "trendlab/market_data.hpp"

namespace fixtures {

inline std::filesystem::path data_dir() { return TRENDLAB_TEST_DATA; }

inline std::string read(const std::string& name) {
  std::ifstream in(data_dir() / name, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

/// 60 business days of OHLCV with a seeded random walk.
inline trendlab::PriceSeries f1() {
  std::istringstream in(read("fixture_f1.csv"));
  return trendlab::parse_price_csv(in, "F1");
}

/// The nine weekly NASDAQ rows printed in the paper's sample table.
inline trendlab::PriceSeries table3() {
  std::istringstream in(read("table3_weekly.csv"));
  return trendlab::parse_price_csv(in, "NDX", trendlab::Interval::weekly);
}

inline trendlab::PriceSeries series_from(const std::vector<double>& adjusted, trendlab::Date start = trendlab::Date(2020, 1, 6)) {
  std::vector<trendlab::PriceBar> bars;
  trendlab::Date d = start;
  for (double p : adjusted) {
    bars.push_back({d, p, p, p, p, p, 1000});
    d = d + 1;
  }
  return trendlab::PriceSeries("T", trendlab::Interval::daily, std::move(bars));
}

/// Scratch directory removed on destruction.
struct TempDir {
  std::filesystem::path path;
  explicit TempDir(const std::string& tag) {
    path = std::filesystem::temp_directory_path() / ("trendlab_" + tag + "_" + std::to_string(::getpid()));
    std::filesystem::remove_all(path);
    std::filesystem::create_directories(path);
  }
  ~TempDir() { std::filesystem::remove_all(path); }
};

}  // namespace fixtures
