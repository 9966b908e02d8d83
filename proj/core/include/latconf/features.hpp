#pragma once

#include <array>
#include <string_view>
#include <vector>

#include "latconf/hwcn.hpp"

namespace latconf {

inline constexpr int kEmbeddingDim = 25;
inline constexpr int kFeatureDim = 32;

// Per-arc input vector of the confidence models: a 25-dimensional
// deterministic hashed word embedding followed by seven scalar features.
struct ArcFeatures {
  // Positions of the scalar features inside values.
  static constexpr int kIsSilence = kEmbeddingDim;
  static constexpr int kPhoneCount = kEmbeddingDim + 1;
  static constexpr int kTransLogp = kEmbeddingDim + 2;
  static constexpr int kAcousticLogp = kEmbeddingDim + 3;
  static constexpr int kLogPosterior = kEmbeddingDim + 4;
  static constexpr int kFrameCount = kEmbeddingDim + 5;
  static constexpr int kOnOnebest = kEmbeddingDim + 6;

  std::array<double, kFeatureDim> values{};
};

// Fixed pseudorandom function of the word token, mapped to 25 values in
// [-1, 1]. The same word always hashes to the same vector.
std::array<double, kEmbeddingDim> word_embedding(std::string_view word);

// Features for every arc, indexed by arc position. Requires merged scores
// and a recorded 1-best path.
std::vector<ArcFeatures> extract_features(const Hwcn& h);

}  // namespace latconf
