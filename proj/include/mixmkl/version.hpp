#pragma once

namespace mixmkl {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace mixmkl
