#pragma once

namespace hypfpp {

inline constexpr const char* kVersion = "0.1.0";

} // namespace hypfpp
