#pragma once

namespace lodreg {

inline constexpr const char* kVersion = "0.1.0";
inline constexpr const char* kToolName = "lodreg";

}  // namespace lodreg
