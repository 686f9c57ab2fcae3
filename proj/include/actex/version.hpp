#pragma once

namespace actex {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace actex
