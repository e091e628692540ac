#pragma once

namespace wjl {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace wjl
