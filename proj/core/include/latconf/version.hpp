#pragma once

namespace latconf {

inline constexpr const char* kToolVersion = "0.1.0";

// Bumped whenever the corresponding on-disk format changes incompatibly.
inline constexpr int kLatticeFormatVersion = 1;
inline constexpr int kHwcnFormatVersion = 1;
inline constexpr int kModelFormatVersion = 1;
inline constexpr int kCalibratorFormatVersion = 1;

}  // namespace latconf
