#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "clockmag/dynamics.hpp"

namespace clockmag {

inline constexpr const char* kVersion = "0.1.0";

namespace cli {

using Json = nlohmann::json;

// Rectangular numeric table with a two-row header (names, units) and a
// commented metadata preamble (version, config hash, seed when stochastic).
struct ResultTable {
  std::vector<std::string> columns;
  std::vector<std::string> units;
  std::vector<std::vector<double>> rows;
  std::string config_hash;
  std::optional<std::uint64_t> seed;  // recorded only when randomness was used

  std::string to_csv() const;
};

std::string format_sci(double value);  // 12 significant digits
std::uint64_t fnv1a(const std::string& bytes);

// Canonical serialization hash: sorted-key compact dump with the top-level
// seed entry removed, FNV-1a 64 in hex.
std::string config_hash(const Json& config);

struct Finding {
  std::string message;
};

// Regime/resolution prechecks; does not run anything.
std::vector<Finding> validate_config(const Json& config);

struct CommandResult {
  ResultTable table;
  Json summary;
  std::string name;  // output file stem
};

struct RunOptions {
  std::uint64_t seed = 0;
  int threads = 1;
  IntegratorConfig integrator;
};

CommandResult run_reproduce(const Json& config, const RunOptions& options);
CommandResult run_sweep(const Json& config, const RunOptions& options);

// Full command-line entry point. Exit codes: 0 success, 1 validation
// findings, 2 usage/config error, 3 numeric failure.
int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::vector<double> linspace(double lo, double hi, int count);
std::vector<double> geomspace(double lo, double hi, int count);

}  // namespace cli
}  // namespace clockmag
