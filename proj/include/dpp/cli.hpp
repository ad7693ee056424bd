#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace dpp::cli {

/// Batch experiment description; loadable from JSON, CLI flags override.
struct ExperimentConfig {
  std::string scenario;
  std::string controller = "dpp";  ///< dpp | omega-only | fixed-action
  std::vector<double> V{1.0};
  double C = 0.0;
  std::uint64_t T = 100000;
  std::uint64_t seed = 1;
  std::size_t ensemble = 32;  ///< seeds; the first keeps per-slot records
  std::string out = "dpp-out";
  bool write_trace = false;
  std::uint64_t checkpoint_every = 0;
  std::string action;          ///< fixed-action controller
  double epsilon = 0.0;        ///< slack of the omega-only policy
  bool common_random_numbers = false;
  std::vector<double> epsilon_grid;  ///< oracle command
  std::string trace_file;            ///< verify command
  std::string summary_file;          ///< verify command: initial state, V, C
  double rate_threshold = 1e-2;
  double constraint_threshold = 1e-2;
  double tolerance_se = 3.0;

  nlohmann::json to_json() const;
  static ExperimentConfig from_json(const nlohmann::json& doc);
};

enum ExitCode : int { kPass = 0, kCheckFailed = 1, kConfigError = 2 };

/// Entry point shared by the executable and the tests.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace dpp::cli
