#pragma once

namespace resblock {

inline constexpr const char* kToolVersion = "0.1.0";

}  // namespace resblock
