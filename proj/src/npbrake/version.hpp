#pragma once

namespace npb {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace npb
