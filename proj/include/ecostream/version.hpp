#pragma once

namespace ecostream {

inline constexpr const char* kEngineVersion = "1.0.0";

}  // namespace ecostream
