#pragma once

#include <string_view>

namespace triagebench {

inline constexpr std::string_view kToolName = "triagebench";
inline constexpr std::string_view kVersion = "0.1.0";

}  // namespace triagebench
