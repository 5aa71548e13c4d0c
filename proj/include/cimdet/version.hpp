#pragma once

namespace cimdet {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace cimdet
