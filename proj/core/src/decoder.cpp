#include "latconf/decoder.hpp"

#include <algorithm>
#include <cmath>

#include "latconf/error.hpp"
#include "latconf/util.hpp"
#include "path_search.hpp"

namespace latconf {

namespace {

struct State {
  double sum = 0.0;
  int arc_count = 0;
  int choice = -1;
  bool valid = false;
};

DecodeResult result_from_path(const Hwcn& h, const std::vector<int>& path) {
  DecodeResult r;
  double sum = 0.0;
  int count = 0;
  bool all_confident = true;
  for (int pos : path) {
    const HwcnArc& a = h.arcs[pos];
    r.arc_ids.push_back(a.id);
    if (a.is_silence()) continue;
    r.words.push_back(a.word);
    if (a.confidence) {
      sum += *a.confidence;
    } else {
      all_confident = false;
    }
    ++count;
  }
  r.n_slots = count;
  if (all_confident && count > 0) {
    r.mean_confidence = sum / count;
    r.estimated_wer = 1.0 - *r.mean_confidence;
  }
  return r;
}

}  // namespace

DecodeResult decode_max_mean(const Hwcn& h) {
  for (const HwcnArc& a : h.arcs) {
    if (!a.confidence) {
      throw ContractError("arc " + std::to_string(a.id) +
                          " has no confidence");
    }
  }
  const HwcnIndex idx = HwcnIndex::build(h);
  const std::vector<int> order = internal::hwcn_topo_positions(h, idx);
  const int source = idx.node_pos.at(h.source_node_id);
  const int sink = idx.node_pos.at(h.sink_node_id);

  // Upper bound on the number of words along any suffix, per node.
  std::vector<int> max_words(h.nodes.size(), -1);
  max_words[sink] = 0;
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    for (int ai : idx.out_arcs[*it]) {
      const int u = idx.node_pos.at(h.arcs[ai].end_node);
      if (max_words[u] < 0) continue;
      const int w = max_words[u] + (h.arcs[ai].is_silence() ? 0 : 1);
      max_words[*it] = std::max(max_words[*it], w);
    }
  }
  const int k_max = max_words[source];

  // state[v][k]: best suffix from node v to the sink containing exactly k
  // non-silence arcs. Within one state all suffixes carry k words, so the
  // (sum desc, arc count asc, lex words asc) order composes under common
  // prefixes and the DP is exact, including tie-breaks.
  std::vector<std::vector<State>> state(h.nodes.size());
  for (size_t v = 0; v < h.nodes.size(); ++v) {
    state[v].assign(std::max(0, max_words[v]) + 1, State{});
  }
  state[sink][0] = {0.0, 0, -1, true};

  auto words_of = [&](int v, int k) {
    std::vector<std::string> out;
    while (true) {
      const State& s = state[v][k];
      if (s.choice < 0) break;
      const HwcnArc& a = h.arcs[s.choice];
      if (!a.is_silence()) {
        out.push_back(a.word);
        --k;
      }
      v = idx.node_pos.at(a.end_node);
    }
    return out;
  };

  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    const int v = *it;
    if (v == sink) continue;
    for (int k = 0; k <= max_words[v]; ++k) {
      State best;
      for (int ai : idx.out_arcs[v]) {
        const HwcnArc& a = h.arcs[ai];
        const int u = idx.node_pos.at(a.end_node);
        const int uk = a.is_silence() ? k : k - 1;
        if (uk < 0 || uk >= static_cast<int>(state[u].size())) continue;
        const State& next = state[u][uk];
        if (!next.valid) continue;
        State cand{next.sum + (a.is_silence() ? 0.0 : *a.confidence),
                   next.arc_count + 1, ai, true};
        if (!best.valid) {
          best = cand;
          continue;
        }
        if (cand.sum != best.sum) {
          if (cand.sum > best.sum) best = cand;
          continue;
        }
        if (cand.arc_count != best.arc_count) {
          if (cand.arc_count < best.arc_count) best = cand;
          continue;
        }
        std::vector<std::string> cw;
        if (!a.is_silence()) cw.push_back(a.word);
        const auto ct = words_of(u, uk);
        cw.insert(cw.end(), ct.begin(), ct.end());
        std::vector<std::string> bw;
        {
          const HwcnArc& b = h.arcs[best.choice];
          if (!b.is_silence()) bw.push_back(b.word);
          const int bu = idx.node_pos.at(b.end_node);
          const auto bt = words_of(bu, b.is_silence() ? k : k - 1);
          bw.insert(bw.end(), bt.begin(), bt.end());
        }
        if (std::lexicographical_compare(cw.begin(), cw.end(), bw.begin(),
                                         bw.end())) {
          best = cand;
        }
      }
      state[v][k] = best;
    }
  }

  // Pick the word count with the best mean at the source. Candidates across
  // different counts are compared by (mean desc, arc count asc, lex asc).
  int best_k = -1;
  double best_mean = -1.0;
  for (int k = 1; k <= k_max; ++k) {
    if (!state[source][k].valid) continue;
    const double mean = state[source][k].sum / k;
    bool take = false;
    if (best_k < 0 || mean > best_mean) {
      take = true;
    } else if (mean == best_mean) {
      const State& cur = state[source][k];
      const State& prev = state[source][best_k];
      if (cur.arc_count != prev.arc_count) {
        take = cur.arc_count < prev.arc_count;
      } else {
        const auto cw = words_of(source, k);
        const auto pw = words_of(source, best_k);
        take = std::lexicographical_compare(cw.begin(), cw.end(), pw.begin(),
                                            pw.end());
      }
    }
    if (take) {
      best_k = k;
      best_mean = mean;
    }
  }

  if (best_k < 0) {
    // Degenerate all-silence network: report the empty word sequence.
    if (!state[source].empty() && state[source][0].valid) {
      std::vector<int> path;
      int v = source;
      int k = 0;
      while (state[v][k].choice >= 0) {
        path.push_back(state[v][k].choice);
        v = idx.node_pos.at(h.arcs[state[v][k].choice].end_node);
      }
      DecodeResult r = result_from_path(h, path);
      r.mean_confidence = 0.0;
      r.estimated_wer = 1.0;
      return r;
    }
    throw ContractError("no source-to-sink path");
  }

  std::vector<int> path;
  int v = source;
  int k = best_k;
  while (state[v][k].choice >= 0) {
    const int ai = state[v][k].choice;
    path.push_back(ai);
    if (!h.arcs[ai].is_silence()) --k;
    v = idx.node_pos.at(h.arcs[ai].end_node);
  }
  DecodeResult r = result_from_path(h, path);
  r.mean_confidence = best_mean;
  r.estimated_wer = 1.0 - best_mean;
  return r;
}

DecodeResult map_onebest(const Hwcn& h, double acoustic_scale) {
  if (!(acoustic_scale > 0.0)) {
    throw ContractError("acoustic_scale must be positive");
  }
  const HwcnIndex idx = HwcnIndex::build(h);
  std::vector<double> scores(h.arcs.size());
  for (size_t i = 0; i < h.arcs.size(); ++i) {
    scores[i] = acoustic_scale * h.arcs[i].merged_acoustic_logp +
                h.arcs[i].merged_trans_logp;
  }
  const std::vector<int> path = internal::best_additive_path(h, idx, scores);
  return result_from_path(h, path);
}

std::string format_decode_line(const std::string& utterance_id,
                               const DecodeResult& r) {
  std::string line = utterance_id;
  line += '\t';
  line += util::join(r.words, " ");
  line += '\t';
  line += util::format_fixed6(r.mean_confidence.value_or(0.0));
  return line;
}

std::vector<DecodedUtterance> parse_decode_file(const std::string& text) {
  std::vector<DecodedUtterance> out;
  int line_no = 0;
  for (const std::string& line : util::split(text, '\n')) {
    ++line_no;
    if (line.empty()) continue;
    const auto cols = util::split(line, '\t');
    if (cols.size() != 3) {
      throw ParseError("expected 3 tab-separated columns", line_no);
    }
    DecodedUtterance u;
    u.utterance_id = cols[0];
    u.words = util::split_whitespace(cols[1]);
    u.mean_confidence = util::parse_double(cols[2], "mean confidence", line_no);
    out.push_back(std::move(u));
  }
  return out;
}

}  // namespace latconf
