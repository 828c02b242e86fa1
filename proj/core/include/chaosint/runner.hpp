#pragma once

#include <ostream>
#include <string>

namespace chaosint {

// Exit codes of the verification commands.
inline constexpr int kExitPass = 0;
inline constexpr int kExitCheckFailed = 1;
inline constexpr int kExitConfigError = 2;

// Commands: product-check | riemann | ibp | norm | square-decomp |
// moment-bound | qv | selftest. `config_json` is the effective configuration
// (file values already overlaid by flags). Writes <out_dir>/<command>*.csv and
// a JSON summary; identical config and seed produce byte-identical reports.
int run_command(const std::string& command, const std::string& config_json, std::ostream& log,
                std::ostream& err);

// File-plus-flag merge helper for front ends: parses `config_path` (optional)
// and overlays `overrides_json`.
std::string merge_config(const std::string& config_path, const std::string& overrides_json);

}  // namespace chaosint
