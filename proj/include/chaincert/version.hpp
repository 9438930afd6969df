#pragma once

namespace chaincert {

inline constexpr const char* kToolName = "chaincert";
inline constexpr const char* kVersion = "0.1.0";

}  // namespace chaincert
