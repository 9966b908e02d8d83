#pragma once

#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "latconf/lattice.hpp"
#include "latconf/posterior.hpp"

namespace latconf {

// Arc of a heterogeneous word confusion network. Carries the merged scores
// of the lattice arcs it represents, plus an optional 0/1 training label and
// an optional confidence score.
struct HwcnArc {
  int id = 0;
  int start_node = 0;
  int end_node = 0;
  std::string word;
  double merged_log_posterior = 0.0;  // <= 0
  double merged_acoustic_logp = 0.0;
  double merged_trans_logp = 0.0;  // <= 0
  std::vector<int> source_arc_ids;
  std::string pronunciation;  // empty when absent
  std::optional<int> label;
  std::optional<double> confidence;

  bool is_silence() const { return word == kSilenceWord; }
};

// Partially merged lattice. Nodes with similar times are collapsed, and
// competing arcs (same start node, end node, and word) are merged, so the
// network simultaneously encodes one confusion-network segmentation per
// source-to-sink node chain.
struct Hwcn {
  std::string utterance_id;
  int frame_ms = 10;
  std::vector<Node> nodes;
  std::vector<HwcnArc> arcs;
  int source_node_id = 0;
  int sink_node_id = 0;
  // MAP 1-best path within the merged network, arc ids in path order.
  std::vector<int> onebest_arc_ids;
};

struct HwcnIndex {
  std::unordered_map<int, int> node_pos;
  std::unordered_map<int, int> arc_pos;
  std::vector<std::vector<int>> in_arcs;
  std::vector<std::vector<int>> out_arcs;

  static HwcnIndex build(const Hwcn& h);
};

// One confusion-network view of the HWCN: the contiguous time slots along a
// single source-to-sink node chain, with the competing arcs of each slot.
struct SegmentationView {
  struct Slot {
    int start_frame = 0;
    int end_frame = 0;
    std::vector<int> arc_ids;  // sorted
  };
  std::vector<Slot> slots;
};

inline constexpr double kDefaultAcousticScale = 1.0 / 12.0;
inline constexpr int kDefaultToleranceFrames = 10;  // 100 ms at 10 ms frames

// Merges competing arcs that share start node, end node, and word. The
// merged posterior is the sum of the input posteriors (capped at one), the
// merged acoustic likelihood is the mean of the input likelihoods, and the
// merged transitional probability weights each input by the prior of its
// pre-merge start node. start_node_log_priors[i] is the log prior of the
// start node arcs[i] had before node merging. A single arc is returned
// unchanged. Throws ContractError if the arcs disagree on word or endpoints.
HwcnArc merge_competing_arcs(std::span<const HwcnArc> arcs,
                             std::span<const double> start_node_log_priors);

// Builds the HWCN from a posterior-annotated lattice:
//   1) leader clustering of time-sorted nodes, new cluster when a node's time
//      exceeds the leader's time + tolerance_frames; clusters containing both
//      endpoints of an arc are split at the arc's later endpoint so no arc
//      becomes a self-loop;
//   2) merging of competing same-word arcs via merge_competing_arcs.
// Merged node times are the cluster leaders' times. The MAP 1-best path is
// recomputed on the merged network with the annotation's acoustic scale.
Hwcn build_hwcn(const PosteriorLattice& p, int tolerance_frames);

// Recomputes onebest_arc_ids by max-sum Viterbi over
// acoustic_scale * merged_acoustic_logp + merged_trans_logp. Ties are broken
// by fewer arcs, then by lexicographically smallest word sequence. Needed
// after parse_hwcn, which does not persist the 1-best.
void recompute_onebest(Hwcn& h, double acoustic_scale);

// Labels every arc 0 or 1 for training: the 1-best words (silence excluded)
// are aligned against the reference; for each 1-best arc aligned as match or
// substitute, every arc competing with it (same start and end node) is
// labeled 1 iff its word equals the aligned reference word. All other arcs
// are labeled 0, and if the alignment contains no match operation at all,
// every arc is labeled 0.
Hwcn label_arcs(const Hwcn& h, const std::vector<std::string>& reference);

// All confusion-network views of the HWCN, one per source-to-sink node
// chain. Chain counts grow exponentially in the worst case; throws
// EnumerationError when the count exceeds max_chains.
std::vector<SegmentationView> enumerate_segmentations(const Hwcn& h,
                                                      int max_chains = 10000);

void validate_hwcn(const Hwcn& h);

// Text format: the lattice format extended with per-arc P= (merged log
// posterior, required) and optional L= (label) and C= (confidence) fields.
// onebest_arc_ids are not persisted; call recompute_onebest after parsing.
Hwcn parse_hwcn(const std::string& text);
std::string serialize_hwcn(const Hwcn& h);

bool operator==(const HwcnArc& a, const HwcnArc& b);
bool operator==(const Hwcn& a, const Hwcn& b);

}  // namespace latconf
