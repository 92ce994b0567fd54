#pragma once

namespace routine {
inline constexpr const char* kVersion = "0.1.0";
}
