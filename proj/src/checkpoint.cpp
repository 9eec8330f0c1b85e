#include "trendlab/checkpoint.hpp"

#include <cmath>

#include "trendlab/error.hpp"

namespace trendlab {

using nlohmann::json;

namespace {

template <typename T>
T read(const json& j, const char* key, const char* context) {
  if (!j.is_object() || !j.contains(key))
    throw DataError(std::string(context) + ": missing key '" + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw DataError(std::string(context) + ": key '" + key + "' has the wrong type");
  }
}

json shape_to_json(const NetworkShape& s) {
  return {{"cell", std::string(to_string(s.cell))},
          {"stream_dims", s.streams.dims},
          {"projected", s.streams.projected},
          {"hidden", s.hidden},
          {"layers", s.layers}};
}

NetworkShape shape_from_json(const json& j) {
  NetworkShape s;
  try {
    s.cell = parse_cell_kind(read<std::string>(j, "cell", "shape"));
  } catch (const ConfigError& e) {
    throw DataError(e.what());
  }
  s.streams.dims = read<std::vector<std::size_t>>(j, "stream_dims", "shape");
  s.streams.projected = read<std::size_t>(j, "projected", "shape");
  s.hidden = read<std::size_t>(j, "hidden", "shape");
  s.layers = read<std::size_t>(j, "layers", "shape");
  try {
    s.validate();
  } catch (const ConfigError& e) {
    throw DataError(std::string("shape: ") + e.what());
  }
  return s;
}

json optional_number(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

std::optional<double> read_optional(const json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  if (!j.at(key).is_number()) throw DataError(std::string("metrics: '") + key + "' must be a number");
  return j.at(key).get<double>();
}

}  // namespace

json to_json(const TrainConfig& c) {
  return {{"epochs", c.epochs},
          {"learning_rate", c.learning_rate},
          {"layers", c.layers},
          {"hidden_size", c.hidden_size},
          {"window", c.window},
          {"seed", c.seed},
          {"cell", std::string(to_string(c.cell))},
          {"forget_bias", c.forget_bias},
          {"adam", {{"beta1", c.adam.beta1}, {"beta2", c.adam.beta2}, {"epsilon", c.adam.epsilon}}}};
}

TrainConfig train_config_from_json(const json& j, TrainConfig c) {
  if (!j.is_object()) throw ConfigError("train config must be an object");
  const auto get = [&j](const char* key, auto& target) {
    if (!j.contains(key)) return;
    try {
      target = j.at(key).get<std::remove_reference_t<decltype(target)>>();
    } catch (const json::exception&) {
      throw ConfigError(std::string("train.") + key + " has the wrong type");
    }
  };
  get("epochs", c.epochs);
  get("learning_rate", c.learning_rate);
  get("layers", c.layers);
  get("hidden_size", c.hidden_size);
  get("window", c.window);
  get("seed", c.seed);
  get("forget_bias", c.forget_bias);
  if (j.contains("cell")) {
    if (!j.at("cell").is_string()) throw ConfigError("train.cell must be a string");
    c.cell = parse_cell_kind(j.at("cell").get<std::string>());
  }
  if (j.contains("adam")) {
    const auto& a = j.at("adam");
    if (!a.is_object()) throw ConfigError("train.adam must be an object");
    const auto getd = [&a](const char* key, double& target) {
      if (!a.contains(key)) return;
      if (!a.at(key).is_number()) throw ConfigError(std::string("train.adam.") + key + " must be a number");
      target = a.at(key).get<double>();
    };
    getd("beta1", c.adam.beta1);
    getd("beta2", c.adam.beta2);
    getd("epsilon", c.adam.epsilon);
  }
  return c;
}

std::string save_checkpoint(const Checkpoint& cp) {
  json params = json::array();
  for (const auto& b : cp.params.blocks())
    params.push_back({{"name", b.name}, {"values", std::vector<double>(b.values.begin(), b.values.end())}});
  json columns = json::array();
  for (const auto& c : cp.scaling.columns)
    columns.push_back({{"kind", std::string(to_string(c.kind))}, {"min", c.min}, {"max", c.max}});
  const json doc = {
      {"schema_version", kCheckpointSchemaVersion},
      {"config", to_json(cp.config)},
      {"shape", shape_to_json(cp.params.shape)},
      {"scale", {{"min", cp.scaling.price.min()}, {"max", cp.scaling.price.max()}}},
      {"columns", columns},
      {"parameters", params},
      {"metrics", {{"train_rmse", optional_number(cp.train_rmse)},
                   {"test_rmse", optional_number(cp.test_rmse)}}},
  };
  return doc.dump(1) + "\n";
}

Checkpoint load_checkpoint(std::string_view bytes) {
  json doc;
  try {
    doc = json::parse(bytes.begin(), bytes.end());
  } catch (const json::parse_error& e) {
    throw DataError(std::string("corrupt or truncated checkpoint: ") + e.what());
  }
  if (!doc.is_object()) throw DataError("checkpoint must be a JSON object");
  const int version = read<int>(doc, "schema_version", "checkpoint");
  if (version != kCheckpointSchemaVersion)
    throw DataError("unsupported checkpoint schema_version " + std::to_string(version) +
                    " (expected " + std::to_string(kCheckpointSchemaVersion) + ")");

  Checkpoint cp;
  try {
    cp.config = train_config_from_json(read<json>(doc, "config", "checkpoint"));
  } catch (const ConfigError& e) {
    throw DataError(std::string("checkpoint config: ") + e.what());
  }
  cp.params = NetworkParameters::zeros(shape_from_json(read<json>(doc, "shape", "checkpoint")));

  const auto scale = read<json>(doc, "scale", "checkpoint");
  cp.scaling.price = NormalizationScale(read<double>(scale, "min", "scale"),
                                        read<double>(scale, "max", "scale"));
  for (const auto& c : read<json>(doc, "columns", "checkpoint")) {
    ColumnTransform t;
    t.kind = parse_column_kind(read<std::string>(c, "kind", "column"));
    t.min = read<double>(c, "min", "column");
    t.max = read<double>(c, "max", "column");
    cp.scaling.columns.push_back(t);
  }

  const auto params = read<json>(doc, "parameters", "checkpoint");
  auto blocks = cp.params.blocks();
  if (!params.is_array() || params.size() != blocks.size())
    throw DataError("checkpoint parameters do not match the declared shape");
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    const auto name = read<std::string>(params[i], "name", "parameter");
    const auto values = read<std::vector<double>>(params[i], "values", "parameter");
    if (name != blocks[i].name || values.size() != blocks[i].values.size())
      throw DataError("checkpoint tensor '" + name + "' does not match expected '" +
                      blocks[i].name + "'");
    for (std::size_t k = 0; k < values.size(); ++k) {
      if (!std::isfinite(values[k])) throw DataError("non-finite value in tensor '" + name + "'");
      blocks[i].values[k] = values[k];
    }
  }

  if (doc.contains("metrics")) {
    const auto& m = doc.at("metrics");
    cp.train_rmse = read_optional(m, "train_rmse");
    cp.test_rmse = read_optional(m, "test_rmse");
  }
  return cp;
}

}  // namespace trendlab
