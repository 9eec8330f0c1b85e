#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "trendlab/market_data.hpp"
#include "trendlab/neural.hpp"

namespace trendlab {

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

struct TrainConfig {
  std::size_t epochs = 2000;
  double learning_rate = 0.01;
  std::size_t layers = 3;
  std::size_t hidden_size = 32;
  std::size_t window = 12;
  std::uint64_t seed = 0;
  AdamConfig adam{};
  CellKind cell = CellKind::lstm;
  double forget_bias = 1.0;

  void validate() const;
  NetworkShape shape(const StreamLayout& streams) const;
};

/// sqrt(mean((prediction - truth)^2)); throws std::invalid_argument on empty or unequal input.
double rmse(std::span<const double> predictions, std::span<const double> truths);

struct AdamState {
  std::vector<std::vector<double>> m;
  std::vector<std::vector<double>> v;
  std::size_t step = 0;

  static AdamState for_parameters(const NetworkParameters& params);
};

/// In-place bias-corrected Adam update of one tensor at step t (t >= 1).
void adam_update(std::span<double> params, std::span<const double> grads, std::span<double> m,
                 std::span<double> v, std::size_t t, double learning_rate, const AdamConfig& adam);

/// Advances `state.step` and applies adam_update to every block. Throws
/// DivergenceError on a non-finite gradient.
void adam_step(NetworkParameters& params, const NetworkParameters& grads, AdamState& state,
               double learning_rate, const AdamConfig& adam);

struct BatchResult {
  double rmse = 0.0;
  std::vector<double> predictions;
};

/// Predictions and RMSE for windows (evaluated in label-time order).
BatchResult evaluate(const NetworkParameters& params, std::span<const Window> windows,
                     std::size_t steps);

/// RMSE and its gradient over a batch. The gradient of sqrt at zero loss is taken as 0.
double loss_and_gradient(const NetworkParameters& params, std::span<const Window> windows,
                         std::size_t steps, NetworkParameters& grads);

struct TrainingRun {
  TrainConfig config;
  std::vector<double> epoch_rmse;  // training RMSE before each update
  double final_train_rmse = 0.0;
  std::optional<double> test_rmse;
  double wall_ms = 0.0;
  NetworkParameters params;
};

using EpochCallback = std::function<void(std::size_t epoch, double rmse)>;

/// Full-batch training: one Adam step per epoch on the RMSE of every training window.
/// Windows are processed in label-time order, so permuting them does not change the run.
TrainingRun train(const WindowedDataset& dataset, const StreamLayout& streams,
                  const TrainConfig& config, const EpochCallback& on_epoch = {});

/// Same loop starting from given parameters.
TrainingRun train_from(const WindowedDataset& dataset, NetworkParameters initial,
                       const TrainConfig& config, const EpochCallback& on_epoch = {});

struct GradientCheckOptions {
  std::size_t steps = 5;
  std::size_t windows = 3;
  double step = 1e-6;
  double tolerance = 1e-5;
  /// Multiplies the checked objective; 0 gives the zero-gradient point.
  double upstream_scale = 1.0;
  /// Test hook applied to the analytic gradient before comparison.
  std::function<void(NetworkParameters&)> corrupt;
};

struct BlockError {
  std::string name;
  double max_relative_error = 0.0;
};

struct GradientCheckReport {
  std::vector<BlockError> blocks;
  double max_relative_error = 0.0;
  double tolerance = 0.0;
  bool passed = false;
  /// Names of blocks above tolerance.
  std::vector<std::string> failing() const;
};

/// Compares analytic gradients of the batch RMSE (random windows and targets drawn from
/// `seed`) with central differences. A block's error is
/// max|analytic - numeric| / max(max|analytic|, max|numeric|, 1e-12).
GradientCheckReport gradient_check(const NetworkShape& shape, std::uint64_t seed,
                                   const GradientCheckOptions& options = {});

}  // namespace trendlab
