#pragma once

namespace phaseloop::version {
inline constexpr const char* name = "phaseloop";
inline constexpr const char* number = "0.1.0";
}  // namespace phaseloop::version
