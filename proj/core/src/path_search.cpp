#include "path_search.hpp"

#include <algorithm>

#include "latconf/error.hpp"
#include "latconf/util.hpp"

namespace latconf::internal {

std::vector<int> hwcn_topo_positions(const Hwcn& h, const HwcnIndex& idx) {
  (void)idx;
  std::vector<int> order(h.nodes.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    if (h.nodes[a].time != h.nodes[b].time) {
      return h.nodes[a].time < h.nodes[b].time;
    }
    return h.nodes[a].id < h.nodes[b].id;
  });
  return order;
}

namespace {

struct Suffix {
  double score = 0.0;
  int arc_count = 0;
  int choice = -1;  // arc position taken from this node; -1 at the sink
  bool valid = false;
};

// Non-silence words of the best suffix starting at node position v.
std::vector<std::string> suffix_words(const Hwcn& h, const HwcnIndex& idx,
                                      const std::vector<Suffix>& suffix,
                                      int v) {
  std::vector<std::string> words;
  while (suffix[v].choice >= 0) {
    const HwcnArc& a = h.arcs[suffix[v].choice];
    if (!a.is_silence()) words.push_back(a.word);
    v = idx.node_pos.at(a.end_node);
  }
  return words;
}

}  // namespace

std::vector<int> best_additive_path(const Hwcn& h, const HwcnIndex& idx,
                                    std::span<const double> arc_scores) {
  if (arc_scores.size() != h.arcs.size()) {
    throw ContractError("arc score vector size mismatch");
  }
  const std::vector<int> order = hwcn_topo_positions(h, idx);
  const int sink = idx.node_pos.at(h.sink_node_id);
  const int source = idx.node_pos.at(h.source_node_id);

  // Best suffix per node, built in reverse topological order. Comparing
  // suffixes at a shared node is exact for the full-path order because any
  // common prefix contributes identically to score, arc count, and the
  // leading words.
  std::vector<Suffix> suffix(h.nodes.size());
  suffix[sink] = {0.0, 0, -1, true};
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    const int v = *it;
    if (v == sink) continue;
    Suffix best;
    for (int ai : idx.out_arcs[v]) {
      const HwcnArc& a = h.arcs[ai];
      const Suffix& next = suffix[idx.node_pos.at(a.end_node)];
      if (!next.valid) continue;
      Suffix cand{next.score + arc_scores[ai], next.arc_count + 1, ai, true};
      if (!best.valid) {
        best = cand;
        continue;
      }
      if (cand.score != best.score) {
        if (cand.score > best.score) best = cand;
        continue;
      }
      if (cand.arc_count != best.arc_count) {
        if (cand.arc_count < best.arc_count) best = cand;
        continue;
      }
      // Score and length tie: compare the word sequences the two choices
      // lead to, materialized on demand (ties are rare).
      std::vector<std::string> cand_words;
      if (!a.is_silence()) cand_words.push_back(a.word);
      const auto tail =
          suffix_words(h, idx, suffix, idx.node_pos.at(a.end_node));
      cand_words.insert(cand_words.end(), tail.begin(), tail.end());
      std::vector<std::string> best_words;
      {
        const HwcnArc& b = h.arcs[best.choice];
        if (!b.is_silence()) best_words.push_back(b.word);
        const auto btail =
            suffix_words(h, idx, suffix, idx.node_pos.at(b.end_node));
        best_words.insert(best_words.end(), btail.begin(), btail.end());
      }
      if (std::lexicographical_compare(cand_words.begin(), cand_words.end(),
                                       best_words.begin(), best_words.end())) {
        best = cand;
      }
    }
    suffix[v] = best;
  }

  if (!suffix[source].valid) {
    throw ContractError("no source-to-sink path");
  }
  std::vector<int> path;
  int v = source;
  while (suffix[v].choice >= 0) {
    path.push_back(suffix[v].choice);
    v = idx.node_pos.at(h.arcs[suffix[v].choice].end_node);
  }
  return path;
}

}  // namespace latconf::internal
