#pragma once

namespace polyfreg {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace polyfreg
