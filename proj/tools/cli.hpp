#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "wifield/invert.hpp"

namespace wifield::cli {

enum ExitCode : int { kOk = 0, kConfigError = 2, kNumericError = 3 };

struct RunReport {
  std::string command;
  std::string config_hash;
  std::uint64_t seed = 0;
  double wall_time_s = 0.0;
  std::vector<std::string> outputs;
  std::map<std::string, double> metrics;
  std::optional<std::string> error;
};

std::string report_to_json(const RunReport& report);

/// The flag wins over WIFIELD_SEED; neither set gives 0. A malformed variable is a ConfigError.
std::uint64_t resolve_seed(std::optional<std::uint64_t> flag);

/// Binary PGM of min-max scaled |chi| for one tone, with +y pointing up.
std::string render_pgm(const PreImage& img, int tone);

int run_cli(int argc, char** argv);

}  // namespace wifield::cli
