#include "trendlab/training.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>

#include "trendlab/error.hpp"

namespace trendlab {

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate))
    throw ConfigError("learning_rate must be positive");
  if (layers == 0) throw ConfigError("layers must be positive");
  if (hidden_size == 0) throw ConfigError("hidden_size must be positive");
  if (window == 0) throw ConfigError("window must be positive");
  if (!(adam.beta1 > 0.0 && adam.beta1 < 1.0)) throw ConfigError("adam beta1 must lie in (0, 1)");
  if (!(adam.beta2 > 0.0 && adam.beta2 < 1.0)) throw ConfigError("adam beta2 must lie in (0, 1)");
  if (!(adam.epsilon > 0.0)) throw ConfigError("adam epsilon must be positive");
  if (!std::isfinite(forget_bias)) throw ConfigError("forget_bias must be finite");
}

NetworkShape TrainConfig::shape(const StreamLayout& streams) const {
  NetworkShape s;
  s.cell = cell;
  s.streams = streams;
  s.hidden = hidden_size;
  s.layers = layers;
  return s;
}

double rmse(std::span<const double> predictions, std::span<const double> truths) {
  if (predictions.empty()) throw std::invalid_argument("rmse: empty input");
  if (predictions.size() != truths.size()) throw std::invalid_argument("rmse: length mismatch");
  double sum = 0.0;
  for (std::size_t k = 0; k < predictions.size(); ++k) {
    const double r = predictions[k] - truths[k];
    sum += r * r;
  }
  return std::sqrt(sum / static_cast<double>(predictions.size()));
}

AdamState AdamState::for_parameters(const NetworkParameters& params) {
  AdamState s;
  for (const auto& b : params.blocks()) {
    s.m.emplace_back(b.values.size(), 0.0);
    s.v.emplace_back(b.values.size(), 0.0);
  }
  return s;
}

void adam_update(std::span<double> params, std::span<const double> grads, std::span<double> m,
                 std::span<double> v, std::size_t t, double learning_rate, const AdamConfig& adam) {
  if (params.size() != grads.size() || m.size() != params.size() || v.size() != params.size())
    throw std::invalid_argument("adam_update: shape mismatch");
  if (t == 0) throw std::invalid_argument("adam_update: step index starts at 1");
  const double c1 = 1.0 - std::pow(adam.beta1, static_cast<double>(t));
  const double c2 = 1.0 - std::pow(adam.beta2, static_cast<double>(t));
  for (std::size_t k = 0; k < params.size(); ++k) {
    const double g = grads[k];
    m[k] = adam.beta1 * m[k] + (1.0 - adam.beta1) * g;
    v[k] = adam.beta2 * v[k] + (1.0 - adam.beta2) * g * g;
    const double m_hat = m[k] / c1;
    const double v_hat = v[k] / c2;
    params[k] -= learning_rate * m_hat / (std::sqrt(v_hat) + adam.epsilon);
  }
}

void adam_step(NetworkParameters& params, const NetworkParameters& grads, AdamState& state,
               double learning_rate, const AdamConfig& adam) {
  auto p = params.blocks();
  const auto g = grads.blocks();
  if (p.size() != g.size() || state.m.size() != p.size())
    throw std::invalid_argument("adam_step: parameter, gradient and moment layouts differ");
  for (const auto& b : g)
    for (double x : b.values)
      if (!std::isfinite(x)) throw DivergenceError("non-finite gradient in " + b.name, -1);
  ++state.step;
  for (std::size_t i = 0; i < p.size(); ++i)
    adam_update(p[i].values, g[i].values, state.m[i], state.v[i], state.step, learning_rate, adam);
}

namespace {

std::vector<std::size_t> time_order(std::span<const Window> windows) {
  std::vector<std::size_t> order(windows.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return windows[a].label_index < windows[b].label_index;
  });
  return order;
}

}  // namespace

BatchResult evaluate(const NetworkParameters& params, std::span<const Window> windows,
                     std::size_t steps) {
  if (windows.empty()) throw std::invalid_argument("evaluate: no windows");
  BatchResult out;
  out.predictions.resize(windows.size());
  double sum = 0.0;
  for (std::size_t k : time_order(windows)) {
    const double p = forward_sequence(windows[k].inputs, steps, params).prediction;
    out.predictions[k] = p;
    const double r = p - windows[k].label;
    sum += r * r;
  }
  out.rmse = std::sqrt(sum / static_cast<double>(windows.size()));
  return out;
}

double loss_and_gradient(const NetworkParameters& params, std::span<const Window> windows,
                         std::size_t steps, NetworkParameters& grads) {
  if (windows.empty()) throw std::invalid_argument("loss_and_gradient: no windows");
  // dL/dtheta = sum_k r_k dp_k/dtheta / (n L): accumulate the residual-weighted sum in one
  // pass and scale once the loss is known.
  auto acc = NetworkParameters::zeros(params.shape);
  double sum = 0.0;
  for (std::size_t k : time_order(windows)) {
    const auto cache = forward_sequence(windows[k].inputs, steps, params);
    const double r = cache.prediction - windows[k].label;
    sum += r * r;
    accumulate_gradients(cache, params, r, acc);
  }
  const double n = static_cast<double>(windows.size());
  const double loss = std::sqrt(sum / n);
  if (!std::isfinite(loss)) throw DivergenceError("non-finite loss", -1);
  if (loss == 0.0) return loss;
  const double factor = 1.0 / (n * loss);
  auto dst = grads.blocks();
  const auto src = acc.blocks();
  if (dst.size() != src.size()) throw std::invalid_argument("loss_and_gradient: gradient layout");
  for (std::size_t i = 0; i < dst.size(); ++i)
    for (std::size_t k = 0; k < dst[i].values.size(); ++k)
      dst[i].values[k] += factor * src[i].values[k];
  return loss;
}

TrainingRun train_from(const WindowedDataset& dataset, NetworkParameters initial,
                       const TrainConfig& config, const EpochCallback& on_epoch) {
  config.validate();
  initial.validate();
  if (dataset.split_index == 0) throw DataError("training split is empty");
  if (dataset.input_dim != initial.shape.streams.input_dim())
    throw DataError("dataset width " + std::to_string(dataset.input_dim) +
                    " does not match the model input width " +
                    std::to_string(initial.shape.streams.input_dim()));
  if (dataset.window != config.window)
    throw ConfigError("dataset window does not match the configured window");

  const auto started = std::chrono::steady_clock::now();
  TrainingRun run;
  run.config = config;
  run.params = std::move(initial);
  auto state = AdamState::for_parameters(run.params);
  auto grads = NetworkParameters::zeros(run.params.shape);
  const auto train_windows = dataset.train();
  run.epoch_rmse.reserve(config.epochs);

  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    try {
      for (auto& b : grads.blocks()) std::fill(b.values.begin(), b.values.end(), 0.0);
      const double loss = loss_and_gradient(run.params, train_windows, dataset.window, grads);
      run.epoch_rmse.push_back(loss);
      if (on_epoch) on_epoch(epoch, loss);
      adam_step(run.params, grads, state, config.learning_rate, config.adam);
    } catch (const DivergenceError& e) {
      throw DivergenceError(std::string("training diverged at epoch ") + std::to_string(epoch) +
                                ": " + e.what(),
                            static_cast<long>(epoch));
    }
  }

  try {
    run.final_train_rmse = evaluate(run.params, train_windows, dataset.window).rmse;
    if (!dataset.test().empty())
      run.test_rmse = evaluate(run.params, dataset.test(), dataset.window).rmse;
  } catch (const DivergenceError& e) {
    throw DivergenceError(std::string("evaluation diverged: ") + e.what(),
                          static_cast<long>(config.epochs));
  }
  run.wall_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - started).count();
  return run;
}

TrainingRun train(const WindowedDataset& dataset, const StreamLayout& streams,
                  const TrainConfig& config, const EpochCallback& on_epoch) {
  config.validate();
  auto params = init_parameters(config.shape(streams), config.seed,
                                InitOptions{config.forget_bias});
  return train_from(dataset, std::move(params), config, on_epoch);
}

std::vector<std::string> GradientCheckReport::failing() const {
  std::vector<std::string> out;
  for (const auto& b : blocks)
    if (!(b.max_relative_error <= tolerance)) out.push_back(b.name);
  return out;
}

GradientCheckReport gradient_check(const NetworkShape& shape, std::uint64_t seed,
                                   const GradientCheckOptions& options) {
  std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
  const auto uniform = [&rng](double lo, double hi) {
    return lo + (hi - lo) * static_cast<double>(rng() >> 11) * 0x1.0p-53;
  };
  auto params = init_parameters(shape, seed);
  // Non-zero biases so every bias block carries a generic gradient.
  for (auto& b : params.blocks())
    if (b.name.find(".b") != std::string::npos)
      for (double& x : b.values) x += uniform(-0.5, 0.5);

  const std::size_t dim = shape.streams.input_dim();
  std::vector<Window> windows(options.windows);
  for (std::size_t k = 0; k < windows.size(); ++k) {
    windows[k].inputs.resize(options.steps * dim);
    for (double& x : windows[k].inputs) x = uniform(-1.0, 1.0);
    windows[k].label = uniform(-1.0, 1.0);
    windows[k].label_index = k;
  }
  const double scale = options.upstream_scale;
  const auto objective = [&](const NetworkParameters& p) {
    return scale * evaluate(p, windows, options.steps).rmse;
  };

  auto analytic = NetworkParameters::zeros(shape);
  loss_and_gradient(params, windows, options.steps, analytic);
  for (auto& b : analytic.blocks())
    for (double& x : b.values) x *= scale;
  if (options.corrupt) options.corrupt(analytic);

  GradientCheckReport report;
  auto probe = params;
  auto probe_blocks = probe.blocks();
  const auto analytic_blocks = analytic.blocks();
  for (std::size_t i = 0; i < probe_blocks.size(); ++i) {
    double max_diff = 0.0, max_mag = 1e-12;
    for (std::size_t k = 0; k < probe_blocks[i].values.size(); ++k) {
      double& x = probe_blocks[i].values[k];
      const double saved = x;
      x = saved + options.step;
      const double up = objective(probe);
      x = saved - options.step;
      const double down = objective(probe);
      x = saved;
      const double numeric = (up - down) / (2.0 * options.step);
      const double a = analytic_blocks[i].values[k];
      max_diff = std::max(max_diff, std::abs(a - numeric));
      max_mag = std::max({max_mag, std::abs(a), std::abs(numeric)});
    }
    const double err = max_diff / max_mag;
    report.blocks.push_back({probe_blocks[i].name, err});
    report.max_relative_error = std::max(report.max_relative_error, err);
  }
  report.tolerance = options.tolerance;
  report.passed = report.max_relative_error <= options.tolerance;
  return report;
}

}  // namespace trendlab
