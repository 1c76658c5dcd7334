#pragma once

namespace soilspec {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace soilspec
