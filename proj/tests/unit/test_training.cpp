#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "oracles.hpp"
#include "trendlab/error.hpp"
#include "trendlab/features.hpp"
#include "trendlab/synthetic.hpp"
#include "trendlab/training.hpp"

using namespace trendlab;

namespace {

WindowedDataset sine_dataset(std::size_t bars, std::size_t window) {
  const auto frame = build_feature_frame(synthetic::sine(bars), {}).frame;
  PrepareOptions o;
  o.window = window;
  return prepare_dataset(frame, o).dataset;
}

TrainConfig small_config(std::size_t epochs) {
  TrainConfig c;
  c.epochs = epochs;
  c.hidden_size = 6;
  c.layers = 2;
  c.window = 6;
  c.seed = 5;
  return c;
}

}  // namespace

TEST_SUITE("training") {

TEST_CASE("rmse") {
  CHECK(rmse(std::vector<double>{1, 2, 3}, std::vector<double>{1, 2, 3}) == 0.0);
  CHECK(rmse(std::vector<double>{1.5, 2.5, 3.5}, std::vector<double>{1, 2, 3}) == doctest::Approx(0.5));
  CHECK(rmse(std::vector<double>{1, 2}, std::vector<double>{3, 6}) == doctest::Approx(std::sqrt(10.0)).epsilon(1e-15));
  CHECK_THROWS_AS(rmse(std::vector<double>{}, std::vector<double>{}), std::invalid_argument);
  CHECK_THROWS_AS(rmse(std::vector<double>{1}, std::vector<double>{1, 2}), std::invalid_argument);
}

TEST_CASE("adam update") {
  const AdamConfig adam;
  SUBCASE("zero gradient leaves parameters unchanged") {
    std::vector<double> p{0.3, -0.7}, g{0, 0}, m{0, 0}, v{0, 0};
    adam_update(p, g, m, v, 1, 0.01, adam);
    CHECK(p == std::vector<double>{0.3, -0.7});
  }
  SUBCASE("first step moves by the learning rate against the sign") {
    std::vector<double> p{1.0, 1.0}, g{0.25, -40.0}, m{0, 0}, v{0, 0};
    adam_update(p, g, m, v, 1, 0.01, adam);
    CHECK(p[0] == doctest::Approx(0.99).epsilon(1e-6));
    CHECK(p[1] == doctest::Approx(1.01).epsilon(1e-6));
  }
  SUBCASE("three unit gradients against the unrolled recurrence") {
    std::vector<double> p{0.5}, m{0}, v{0};
    const auto expected = oracle::adam_path(0.5, {1, 1, 1}, 0.01, 0.9, 0.999, 1e-8);
    for (std::size_t t = 1; t <= 3; ++t) {
      adam_update(p, std::vector<double>{1.0}, m, v, t, 0.01, adam);
      CHECK(std::abs(p[0] - expected[t - 1]) <= 1e-12);
    }
  }
  SUBCASE("varying gradients") {
    const std::vector<double> grads{0.3, -1.2, 0.05, 2.0, -0.4};
    std::vector<double> p{-0.2}, m{0}, v{0};
    const auto expected = oracle::adam_path(-0.2, grads, 0.003, 0.9, 0.999, 1e-8);
    for (std::size_t t = 1; t <= grads.size(); ++t) adam_update(p, std::vector<double>{grads[t - 1]}, m, v, t, 0.003, adam);
    CHECK(std::abs(p[0] - expected.back()) <= 1e-12);
  }
}

TEST_CASE("config validation") {
  TrainConfig c;
  CHECK_NOTHROW(c.validate());
  c.learning_rate = 0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = {};
  c.adam.beta1 = 1.0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = {};
  c.hidden_size = 0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
}

TEST_CASE("zero epochs keeps the initialization") {
  const auto ds = sine_dataset(60, 6);
  const auto streams = StreamLayout::standard(true);
  const auto run = train(ds, streams, small_config(0));
  CHECK(run.epoch_rmse.empty());
  const auto init = init_parameters(small_config(0).shape(streams), 5);
  const auto a = run.params.blocks();
  const auto b = init.blocks();
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(std::equal(a[i].values.begin(), a[i].values.end(), b[i].values.begin()));
  CHECK(run.final_train_rmse == evaluate(init, ds.train(), 6).rmse);
}

TEST_CASE("training is deterministic and reduces the loss") {
  const auto ds = sine_dataset(60, 6);
  const auto streams = StreamLayout::standard(true);
  const auto a = train(ds, streams, small_config(60));
  const auto b = train(ds, streams, small_config(60));
  CHECK(a.epoch_rmse == b.epoch_rmse);
  CHECK(a.final_train_rmse == b.final_train_rmse);
  CHECK(a.final_train_rmse < a.epoch_rmse.front());
  REQUIRE(a.test_rmse);
  CHECK(std::isfinite(*a.test_rmse));
}

TEST_CASE("loss gradient is zero at zero loss") {
  const auto ds = sine_dataset(60, 6);
  auto params = NetworkParameters::zeros(small_config(0).shape(StreamLayout::standard(true)));
  std::vector<Window> windows(ds.train().begin(), ds.train().end());
  for (auto& w : windows) w.label = 0.0;
  auto grads = NetworkParameters::zeros(params.shape);
  CHECK(loss_and_gradient(params, windows, 6, grads) == 0.0);
  for (const auto& b : grads.blocks())
    for (double v : b.values) CHECK(v == 0.0);
}

TEST_CASE("window order does not change the run") {
  auto ds = sine_dataset(60, 6);
  const auto streams = StreamLayout::standard(true);
  const auto base = train(ds, streams, small_config(20));
  std::mt19937_64 rng(3);
  std::shuffle(ds.windows.begin(), ds.windows.begin() + static_cast<long>(ds.split_index), rng);
  const auto shuffled = train(ds, streams, small_config(20));
  CHECK(base.epoch_rmse == shuffled.epoch_rmse);
  CHECK(base.final_train_rmse == shuffled.final_train_rmse);
}

TEST_CASE("divergence is reported with its epoch") {
  auto ds = sine_dataset(60, 6);
  ds.windows[0].inputs[0] = std::nan("");
  try {
    train(ds, StreamLayout::standard(true), small_config(5));
    FAIL("expected divergence");
  } catch (const DivergenceError& e) {
    CHECK(e.epoch() == 1);
  }
}

TEST_CASE("mismatched dataset and model widths are rejected") {
  const auto ds = sine_dataset(60, 6);
  CHECK_THROWS_AS(train(ds, StreamLayout::standard(false), small_config(1)), DataError);
}

}  // TEST_SUITE
