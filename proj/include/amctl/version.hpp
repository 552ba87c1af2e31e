#pragma once

namespace amctl {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace amctl
