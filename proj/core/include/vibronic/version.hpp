#pragma once

namespace vib {

inline constexpr const char kVersion[] = "1.0.0";

}  // namespace vib
