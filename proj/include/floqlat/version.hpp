#pragma once

namespace floqlat {

inline constexpr const char* version = "0.1.0";

}  // namespace floqlat
