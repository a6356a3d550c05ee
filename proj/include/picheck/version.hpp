#pragma once
#include <string_view>

namespace picheck {
inline constexpr std::string_view version = "0.1.0";
}
