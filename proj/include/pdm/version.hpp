#pragma once

namespace pdm {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace pdm
