#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "pstab/spectral.hpp"

namespace pstab::cli {

inline constexpr int kExitPassed = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitFailed = 2;

struct RunConfig {
  std::string command;
  std::vector<double> p_list;
  std::string domain = "interval:0,1";
  std::string measure = "lebesgue";
  int level = 4;
  SolverOptions solver;
  std::uint64_t seed = 1;
  int fields = 1;  ///< random trial fields per (p, domain, measure) cell
  std::string out;       ///< JSON report path; empty writes to stdout
  std::string csv;       ///< optional CSV path
  std::string mesh_out;  ///< eigen: mesh file path (default: <out>.mesh)
  bool no_timestamp = false;
  std::vector<std::string> battery_domains;
  std::vector<std::string> battery_measures;
  double constant_factor = 1.0;  ///< test hook: scales every stability constant

  /// Throws std::invalid_argument when the invariants do not hold.
  void validate() const;
};

/// Applies the keys of a JSON config object onto `config`.
void apply_config_json(const nlohmann::json& j, RunConfig& config);

/// Dispatches the command, writes the report and CSV, and returns the exit
/// status: 0 all verdicts passed, 2 an inequality failed. Throws on
/// configuration or solver errors.
int run(const RunConfig& config, std::ostream& out);

/// Full command-line entry point (argument parsing and error mapping).
/// `args` excludes the program name.
int main_entry(std::vector<std::string> args, std::ostream& out, std::ostream& err);

}  // namespace pstab::cli
