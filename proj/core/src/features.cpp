#include "latconf/features.hpp"

#include <cctype>
#include <set>

#include "latconf/error.hpp"
#include "latconf/util.hpp"

namespace latconf {

std::array<double, kEmbeddingDim> word_embedding(std::string_view word) {
  std::array<double, kEmbeddingDim> out;
  const uint64_t base = util::fnv1a64(word);
  for (int k = 0; k < kEmbeddingDim; ++k) {
    const uint64_t u =
        util::mix64(util::hash_combine(base, static_cast<uint64_t>(k + 1)));
    const double unit = static_cast<double>(u >> 11) * 0x1.0p-53;  // [0,1)
    out[k] = 2.0 * unit - 1.0;
  }
  return out;
}

namespace {

int letter_count(std::string_view word) {
  int n = 0;
  for (unsigned char c : word) {
    if (std::isalpha(c)) ++n;
  }
  return n;
}

}  // namespace

std::vector<ArcFeatures> extract_features(const Hwcn& h) {
  if (h.onebest_arc_ids.empty()) {
    throw ContractError("extract_features requires onebest_arc_ids");
  }
  const HwcnIndex idx = HwcnIndex::build(h);
  const std::set<int> onebest(h.onebest_arc_ids.begin(),
                              h.onebest_arc_ids.end());

  std::vector<ArcFeatures> out(h.arcs.size());
  for (size_t i = 0; i < h.arcs.size(); ++i) {
    const HwcnArc& a = h.arcs[i];
    ArcFeatures& f = out[i];
    const auto emb = word_embedding(a.word);
    for (int k = 0; k < kEmbeddingDim; ++k) f.values[k] = emb[k];
    f.values[ArcFeatures::kIsSilence] = a.is_silence() ? 1.0 : 0.0;
    // Phone count proxy: pronunciation string length when the lattice
    // carried one, otherwise the number of letters in the word.
    f.values[ArcFeatures::kPhoneCount] =
        a.pronunciation.empty() ? static_cast<double>(letter_count(a.word))
                                : static_cast<double>(a.pronunciation.size());
    f.values[ArcFeatures::kTransLogp] = a.merged_trans_logp;
    f.values[ArcFeatures::kAcousticLogp] = a.merged_acoustic_logp;
    f.values[ArcFeatures::kLogPosterior] = a.merged_log_posterior;
    const int start_time = h.nodes[idx.node_pos.at(a.start_node)].time;
    const int end_time = h.nodes[idx.node_pos.at(a.end_node)].time;
    f.values[ArcFeatures::kFrameCount] = static_cast<double>(end_time - start_time);
    f.values[ArcFeatures::kOnOnebest] = onebest.count(a.id) ? 1.0 : 0.0;
  }
  return out;
}

}  // namespace latconf
