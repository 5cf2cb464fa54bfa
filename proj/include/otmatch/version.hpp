#pragma once

namespace otm {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace otm
