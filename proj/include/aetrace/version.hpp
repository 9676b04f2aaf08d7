#pragma once

namespace aetrace {

inline constexpr const char* kToolVersion = "0.1.0";

} // namespace aetrace
