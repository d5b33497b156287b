#pragma once

namespace lrgap {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace lrgap
