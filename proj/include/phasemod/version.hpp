#pragma once

namespace phasemod {

inline constexpr const char* version_string = "phasemod 0.1.0";

} // namespace phasemod
