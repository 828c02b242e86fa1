#pragma once

namespace chaosint {
inline constexpr const char* kVersion = "0.1.0";
inline constexpr int kSummarySchema = 1;
}  // namespace chaosint
