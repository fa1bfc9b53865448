#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

#include <json.hpp>

namespace mdest::cli {

inline constexpr const char* report_version = "0.1.0";

struct CommandOptions {
  std::optional<std::uint64_t> seed;
  std::optional<std::filesystem::path> export_dir;  // simulate only
};

/// JSON report plus the fixed-width text summary.
struct CommandResult {
  nlohmann::json report;
  std::string table;
};

/// `base_dir` resolves relative data paths in the config.
CommandResult cmd_estimate(const nlohmann::json& config, const std::filesystem::path& base_dir,
                           const CommandOptions& opts = {});
CommandResult cmd_diagnose(const nlohmann::json& config, const std::filesystem::path& base_dir,
                           const CommandOptions& opts = {});
CommandResult cmd_simulate(const nlohmann::json& config, const CommandOptions& opts = {});

/// Full command line; returns the process exit status.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace mdest::cli
