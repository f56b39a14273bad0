#pragma once

namespace dfr {

inline constexpr const char* kVersion = "1.0.0";

}  // namespace dfr
