#pragma once

namespace nmlab {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace nmlab
