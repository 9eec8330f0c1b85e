#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>

#include "run_config.hpp"

namespace trendlab::cli {

struct Io {
  std::ostream& out;
  std::ostream& err;
};

void cmd_features(const RunConfig& config, Io io);
void cmd_train(const RunConfig& config, Io io);
void cmd_predict(const RunConfig& config, Io io);
/// which: interval, regime, sentiment, forget-gate or all.
void cmd_experiment(const RunConfig& config, std::string_view which, Io io);
/// Writes a synthetic price file, a sentiment file and a starter config into `out`.
void cmd_generate(std::string_view fixture, std::uint64_t seed, const fs::path& out, Io io);

/// Parses arguments and dispatches. Returns the process exit code:
/// 0 success, 1 usage or config error, 2 data error, 3 numerical divergence.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace trendlab::cli
