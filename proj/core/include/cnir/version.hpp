#pragma once

namespace cnir {

inline constexpr const char* kVersion = "1.0.0";
inline constexpr const char* kCheckpointFormat = "cnir-ckpt v1";
inline constexpr const char* kIndexFormat = "cnir-index v1";

}  // namespace cnir
