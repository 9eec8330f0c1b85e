#include "run_config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "trendlab/checkpoint.hpp"
#include "trendlab/error.hpp"

namespace trendlab::cli {

using nlohmann::json;

namespace {

void check_keys(const json& j, const std::string& context, std::initializer_list<const char*> allowed) {
  if (!j.is_object()) throw ConfigError(context + " must be an object");
  const std::set<std::string> keys(allowed.begin(), allowed.end());
  for (const auto& [key, value] : j.items())
    if (!keys.count(key)) throw ConfigError("unknown key '" + (context.empty() ? key : context + "." + key) + "'");
}

template <typename T>
void read(const json& j, const char* key, const std::string& context, T& target) {
  if (!j.contains(key)) return;
  const auto& v = j.at(key);
  const auto where = context + "." + key;
  if constexpr (std::is_same_v<T, bool>) {
    if (!v.is_boolean()) throw ConfigError(where + " must be true or false");
  } else if constexpr (std::is_integral_v<T>) {
    if (!v.is_number_unsigned()) throw ConfigError(where + " must be a non-negative integer");
  } else if constexpr (std::is_floating_point_v<T>) {
    if (!v.is_number()) throw ConfigError(where + " must be a number");
  } else {
    if (!v.is_string()) throw ConfigError(where + " must be a string");
  }
  target = v.get<T>();
}

std::optional<fs::path> read_path(const json& j, const char* key, const fs::path& base) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  if (!j.at(key).is_string()) throw ConfigError(std::string("data.") + key + " must be a path string");
  const fs::path p = j.at(key).get<std::string>();
  return p.is_absolute() ? p : base / p;
}

template <typename T>
std::vector<T> read_list(const json& v, const std::string& where) {
  if (!v.is_array() || v.empty()) throw ConfigError(where + " must be a non-empty array");
  std::vector<T> out;
  for (const auto& x : v) {
    if (!x.is_number_unsigned()) throw ConfigError(where + " entries must be non-negative integers");
    out.push_back(x.get<T>());
  }
  return out;
}

Date read_date(const json& v, const std::string& where) {
  if (!v.is_string()) throw ConfigError(where + " must be a YYYY-MM-DD string");
  try {
    return Date::parse(v.get<std::string>());
  } catch (const DataError& e) {
    throw ConfigError(where + ": " + e.what());
  }
}

json path_json(const std::optional<fs::path>& p) { return p ? json(p->generic_string()) : json(nullptr); }

}  // namespace

void RunConfig::validate() const {
  indicators.validate();
  train.validate();
  train.shape(StreamLayout::standard(with_sentiment, projected)).validate();
  if (ratio.train == 0 || ratio.test == 0) throw ConfigError("split ratio terms must be positive");
  if (seeds.empty()) throw ConfigError("experiment.seeds must not be empty");
  if (segments.empty()) throw ConfigError("experiment.segments must not be empty");
  for (const auto& s : segments)
    if (!(s.first < s.last)) throw ConfigError("segment " + s.first.iso() + " does not end after it starts");
  for (auto w : forget_gate_windows)
    if (w == 0) throw ConfigError("forget-gate window sizes must be positive");
  if (!(regime_threshold > 0.0)) throw ConfigError("experiment.regime_threshold must be positive");
  for (const auto& p : {prices, sentiment, features, checkpoint})
    if (p && !fs::is_regular_file(*p)) throw ConfigError("no such file: " + p->generic_string());
}

ExperimentConfig RunConfig::experiment_config() const {
  ExperimentConfig c;
  c.train = train;
  c.indicators = indicators;
  c.projected = projected;
  c.ratio = ratio;
  c.fit_on_full_period = fit_on_full_period;
  c.seeds = seeds;
  c.regime_threshold = regime_threshold;
  c.record_wall_time = record_wall_time;
  c.threads = threads_from_env();
  return c;
}

json RunConfig::to_json() const {
  json segs = json::array();
  for (const auto& s : segments) segs.push_back({{"first", s.first.iso()}, {"last", s.last.iso()}});
  return {
      {"data",
       {{"prices", path_json(prices)},
        {"sentiment", path_json(sentiment)},
        {"features", path_json(features)},
        {"checkpoint", path_json(checkpoint)},
        {"symbol", symbol}}},
      {"interval", std::string(trendlab::to_string(interval))},
      {"indicators",
       {{"rsi_period", indicators.rsi_period},
        {"cci_period", indicators.cci_period},
        {"cci_constant", indicators.cci_constant},
        {"macd_fast", indicators.macd_fast},
        {"macd_slow", indicators.macd_slow},
        {"macd_signal", indicators.macd_signal}}},
      {"fusion", {{"projected", projected}, {"sentiment", with_sentiment}}},
      {"train", trendlab::to_json(train)},
      {"split", {{"train", ratio.train}, {"test", ratio.test}, {"fit_on_full_period", fit_on_full_period}}},
      {"experiment",
       {{"seeds", seeds},
        {"segments", segs},
        {"forget_gate_windows", forget_gate_windows},
        {"regime_threshold", regime_threshold},
        {"record_wall_time", record_wall_time}}},
      {"out", out.generic_string()},
  };
}

RunConfig parse_run_config(const json& doc, const fs::path& base) {
  check_keys(doc, "", {"data", "interval", "indicators", "fusion", "train", "split", "experiment", "out"});
  RunConfig c;
  if (doc.contains("data")) {
    const auto& d = doc.at("data");
    check_keys(d, "data", {"prices", "sentiment", "features", "checkpoint", "symbol"});
    c.prices = read_path(d, "prices", base);
    c.sentiment = read_path(d, "sentiment", base);
    c.features = read_path(d, "features", base);
    c.checkpoint = read_path(d, "checkpoint", base);
    read(d, "symbol", "data", c.symbol);
  }
  if (doc.contains("interval")) {
    if (!doc.at("interval").is_string()) throw ConfigError("interval must be a string");
    try {
      c.interval = parse_interval(doc.at("interval").get<std::string>());
    } catch (const DataError& e) {
      throw ConfigError(e.what());
    }
  }
  if (doc.contains("indicators")) {
    const auto& j = doc.at("indicators");
    check_keys(j, "indicators",
               {"rsi_period", "cci_period", "cci_constant", "macd_fast", "macd_slow", "macd_signal"});
    read(j, "rsi_period", "indicators", c.indicators.rsi_period);
    read(j, "cci_period", "indicators", c.indicators.cci_period);
    read(j, "cci_constant", "indicators", c.indicators.cci_constant);
    read(j, "macd_fast", "indicators", c.indicators.macd_fast);
    read(j, "macd_slow", "indicators", c.indicators.macd_slow);
    read(j, "macd_signal", "indicators", c.indicators.macd_signal);
  }
  if (doc.contains("fusion")) {
    const auto& j = doc.at("fusion");
    check_keys(j, "fusion", {"projected", "sentiment"});
    read(j, "projected", "fusion", c.projected);
    read(j, "sentiment", "fusion", c.with_sentiment);
  }
  if (doc.contains("train")) {
    const auto& j = doc.at("train");
    check_keys(j, "train",
               {"epochs", "learning_rate", "layers", "hidden_size", "window", "seed", "cell", "forget_bias", "adam"});
    for (const char* key : {"epochs", "layers", "hidden_size", "window", "seed"})
      if (j.contains(key) && !j.at(key).is_number_unsigned())
        throw ConfigError(std::string("train.") + key + " must be a non-negative integer");
    c.train = train_config_from_json(j);
  }
  if (doc.contains("split")) {
    const auto& j = doc.at("split");
    check_keys(j, "split", {"train", "test", "fit_on_full_period"});
    read(j, "train", "split", c.ratio.train);
    read(j, "test", "split", c.ratio.test);
    read(j, "fit_on_full_period", "split", c.fit_on_full_period);
  }
  if (doc.contains("experiment")) {
    const auto& j = doc.at("experiment");
    check_keys(j, "experiment",
               {"seeds", "segments", "forget_gate_windows", "regime_threshold", "record_wall_time"});
    if (j.contains("seeds")) c.seeds = read_list<std::uint64_t>(j.at("seeds"), "experiment.seeds");
    if (j.contains("forget_gate_windows"))
      c.forget_gate_windows = read_list<std::size_t>(j.at("forget_gate_windows"), "experiment.forget_gate_windows");
    if (j.contains("segments")) {
      const auto& s = j.at("segments");
      if (s.is_string()) {
        if (s.get<std::string>() != "nasdaq")
          throw ConfigError("experiment.segments must be \"nasdaq\" or a list of {first, last}");
        c.segments = nasdaq_regime_preset();
      } else {
        if (!s.is_array() || s.empty()) throw ConfigError("experiment.segments must be a non-empty array");
        c.segments.clear();
        for (const auto& seg : s) {
          check_keys(seg, "experiment.segments[]", {"first", "last"});
          if (!seg.contains("first") || !seg.contains("last"))
            throw ConfigError("experiment.segments entries need first and last");
          c.segments.push_back({read_date(seg.at("first"), "segment first"), read_date(seg.at("last"), "segment last")});
        }
      }
    }
    read(j, "regime_threshold", "experiment", c.regime_threshold);
    read(j, "record_wall_time", "experiment", c.record_wall_time);
  }
  if (doc.contains("out")) {
    if (!doc.at("out").is_string()) throw ConfigError("out must be a path string");
    const fs::path p = doc.at("out").get<std::string>();
    c.out = p.is_absolute() ? p : base / p;
  } else {
    c.out = base / "out";
  }
  return c;
}

RunConfig load_run_config(const fs::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw ConfigError("cannot open config " + file.generic_string());
  std::stringstream buf;
  buf << in.rdbuf();
  json doc;
  try {
    doc = json::parse(buf.str());
  } catch (const json::parse_error& e) {
    throw ConfigError("config " + file.generic_string() + " is not valid JSON: " + e.what());
  }
  return parse_run_config(doc, file.parent_path());
}

}  // namespace trendlab::cli
