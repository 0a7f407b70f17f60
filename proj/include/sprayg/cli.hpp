#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>

namespace sprayg {

inline constexpr const char* kToolVersion = "sprayg 1.0.0";

enum ExitCode : int { exit_pass = 0, exit_verification_failed = 1, exit_input_error = 2, exit_numerical_failure = 3 };

struct CliOptions {
  std::string config;  // file path, or "catalog:NAME"
  std::string command;
  std::optional<std::uint64_t> seed;
  std::optional<double> scale;
  std::optional<int> samples;
  std::optional<int> rk_steps;
  std::optional<int> quad_nodes;
  std::string out;  // JSON report path; stdout when empty
  std::string csv;  // optional CSV mirror of the per-sample residuals
};

// Runs one command; the JSON document (result, report, or error) goes to `out` or options.out.
int run_command(const CliOptions& options, std::ostream& out);

// 64-bit FNV-1a, used for the report's config_hash.
std::uint64_t fnv1a(const std::string& text);

}  // namespace sprayg
