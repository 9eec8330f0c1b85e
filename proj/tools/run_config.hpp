#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "trendlab/experiments.hpp"
#include "trendlab/indicators.hpp"
#include "trendlab/market_data.hpp"
#include "trendlab/training.hpp"

namespace trendlab::cli {

namespace fs = std::filesystem;

/// Everything a command needs, read from the JSON config and command-line overrides.
/// Relative paths are resolved against the config file's directory.
struct RunConfig {
  std::optional<fs::path> prices;
  std::optional<fs::path> sentiment;
  std::optional<fs::path> features;
  std::optional<fs::path> checkpoint;
  std::string symbol = "INDEX";
  Interval interval = Interval::daily;

  IndicatorConfig indicators;
  std::size_t projected = 0;
  bool with_sentiment = true;
  TrainConfig train;
  SplitRatio ratio{};
  bool fit_on_full_period = false;

  std::vector<std::uint64_t> seeds{1, 2, 3};
  std::vector<Segment> segments = nasdaq_regime_preset();
  std::vector<std::size_t> forget_gate_windows{4, 8, 16};
  double regime_threshold = 0.15;
  bool record_wall_time = false;

  fs::path out = "out";

  /// Numeric constraints and path existence; throws ConfigError.
  void validate() const;
  ExperimentConfig experiment_config() const;
  /// Full config with resolved paths, for the echo written next to every output.
  nlohmann::json to_json() const;
};

/// Unknown keys are rejected so typos surface as config errors.
RunConfig parse_run_config(const nlohmann::json& doc, const fs::path& base_dir);
RunConfig load_run_config(const fs::path& file);

}  // namespace trendlab::cli
