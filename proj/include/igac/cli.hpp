#pragma once

#include <filesystem>
#include <iosfwd>

#include "igac/io.hpp"

namespace igac::cli {

inline constexpr const char* kToolName = "igac";
inline constexpr const char* kVersion = "0.1.0";

enum ExitCode { kOk = 0, kIoFailure = 1, kInvalidConfig = 2, kNumericalFailure = 3 };

/// Fills defaults and validates a raw configuration. The result is what the
/// manifest echoes; running it again reproduces the same artifacts. Throws
/// DomainError or UnsupportedError for invalid input.
Json resolve_config(const Json& raw);

/// Executes a resolved configuration, writing manifest.json, report.json and
/// CSV traces into out_dir. Returns an ExitCode; diagnostics go to err.
int run(const Json& config, const std::filesystem::path& out_dir, std::ostream& err);

/// Command-line entry point: subcommand, flags and optional --config file.
int main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace igac::cli
