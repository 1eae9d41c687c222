#pragma once

namespace availsim {

inline constexpr const char* kVersion = "0.1.0";
inline constexpr const char* kToolName = "availsim";

} // namespace availsim
