#include <doctest.h>

#include <json.hpp>

#include "trendlab/checkpoint.hpp"
#include "trendlab/error.hpp"
#include "trendlab/synthetic.hpp"

using namespace trendlab;

namespace {

Checkpoint sample(std::uint64_t seed, CellKind cell = CellKind::lstm) {
  TrainConfig c;
  c.hidden_size = 5;
  c.layers = 2;
  c.seed = seed;
  c.cell = cell;
  c.learning_rate = 0.1 / 3.0;
  Checkpoint cp;
  cp.config = c;
  cp.params = init_parameters(c.shape(StreamLayout::standard(true)), seed);
  cp.scaling.price = NormalizationScale(1728.339966, 1902.880005);
  cp.scaling.columns = {{ColumnTransform::Kind::price, 1728.339966, 1902.880005},
                        {ColumnTransform::Kind::minmax, 1e9, 3.3e9},
                        {ColumnTransform::Kind::delta, 1728.339966, 1902.880005},
                        {ColumnTransform::Kind::minmax, 12.5, 88.25},
                        {ColumnTransform::Kind::constant, 0, 0},
                        {ColumnTransform::Kind::minmax, -3.1, 2.7},
                        {ColumnTransform::Kind::identity, 0, 1}};
  cp.train_rmse = 0.1 + 0.2;
  return cp;
}

}  // namespace

TEST_SUITE("checkpoint") {

TEST_CASE("round trip is bitwise") {
  for (auto cell : {CellKind::lstm, CellKind::rnn}) {
    const auto cp = sample(17, cell);
    const auto bytes = save_checkpoint(cp);
    const auto back = load_checkpoint(bytes);
    CHECK(save_checkpoint(back) == bytes);
    const auto a = cp.params.blocks();
    const auto b = back.params.blocks();
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
      CHECK(a[i].name == b[i].name);
      CHECK(std::equal(a[i].values.begin(), a[i].values.end(), b[i].values.begin()));
    }
    CHECK(back.params.head_bias == cp.params.head_bias);
    CHECK(back.config.learning_rate == cp.config.learning_rate);
    CHECK(back.scaling.price == cp.scaling.price);
    CHECK(*back.train_rmse == *cp.train_rmse);
    CHECK_FALSE(back.test_rmse);
    CHECK(back.scaling.columns[4].kind == ColumnTransform::Kind::constant);
  }
}

TEST_CASE("schema violations") {
  const auto bytes = save_checkpoint(sample(2));
  auto doc = nlohmann::json::parse(bytes);

  SUBCASE("bumped version") {
    doc["schema_version"] = kCheckpointSchemaVersion + 1;
    CHECK_THROWS_WITH_AS(load_checkpoint(doc.dump()), doctest::Contains("schema_version"), DataError);
  }
  SUBCASE("truncated file") {
    CHECK_THROWS_AS(load_checkpoint(bytes.substr(0, bytes.size() / 2)), DataError);
  }
  SUBCASE("tensor of the wrong size") {
    doc["parameters"][3]["values"].erase(0);
    CHECK_THROWS_AS(load_checkpoint(doc.dump()), DataError);
  }
  SUBCASE("missing key") {
    doc.erase("scale");
    CHECK_THROWS_AS(load_checkpoint(doc.dump()), DataError);
  }
  SUBCASE("not json at all") {
    CHECK_THROWS_AS(load_checkpoint("garbage"), DataError);
  }
}

TEST_CASE("trained model reloads and reproduces its metrics") {
  const auto frame = build_feature_frame(synthetic::sine(60), {}).frame;
  PrepareOptions o;
  o.window = 6;
  const auto data = prepare_dataset(frame, o);
  TrainConfig c;
  c.epochs = 40;
  c.hidden_size = 6;
  c.layers = 2;
  c.window = 6;
  const auto run = train(data.dataset, StreamLayout::standard(true), c);
  const auto bytes = save_checkpoint({c, run.params, data.scaling, run.final_train_rmse, run.test_rmse});
  const auto back = load_checkpoint(bytes);
  CHECK(evaluate(back.params, data.dataset.test(), 6).rmse == *run.test_rmse);
  CHECK(evaluate(back.params, data.dataset.train(), 6).rmse == run.final_train_rmse);
  CHECK(*back.test_rmse == *run.test_rmse);
}

TEST_CASE("train config json defaults and type errors") {
  const auto c = train_config_from_json(nlohmann::json{{"epochs", 7}, {"cell", "rnn"}});
  CHECK(c.epochs == 7);
  CHECK(c.cell == CellKind::rnn);
  CHECK(c.hidden_size == 32);
  CHECK_THROWS_AS(train_config_from_json(nlohmann::json{{"epochs", "many"}}), ConfigError);
  CHECK_THROWS_AS(train_config_from_json(nlohmann::json{{"cell", "gru"}}), ConfigError);
}

}  // TEST_SUITE
