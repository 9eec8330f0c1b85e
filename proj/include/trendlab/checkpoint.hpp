#pragma once

#include <optional>
#include <string>
#include <string_view>

#include <json.hpp>

#include "trendlab/features.hpp"
#include "trendlab/neural.hpp"
#include "trendlab/training.hpp"

namespace trendlab {

inline constexpr int kCheckpointSchemaVersion = 1;

struct Checkpoint {
  TrainConfig config;
  NetworkParameters params;
  FeatureScaling scaling;  // price scale plus per-column input transforms
  std::optional<double> train_rmse;
  std::optional<double> test_rmse;
};

nlohmann::json to_json(const TrainConfig& config);
/// Missing keys keep their defaults; wrong types throw ConfigError.
TrainConfig train_config_from_json(const nlohmann::json& j, TrainConfig base = {});

/// Versioned JSON; doubles are written in shortest round-trip form so parsing
/// restores every bit.
std::string save_checkpoint(const Checkpoint& checkpoint);
/// Throws DataError on truncated input, schema violations or a schema_version mismatch.
Checkpoint load_checkpoint(std::string_view bytes);

}  // namespace trendlab
