#include "latconf/hwcn.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "latconf/align.hpp"
#include "latconf/error.hpp"
#include "latconf/util.hpp"
#include "path_search.hpp"

namespace latconf {

using util::log_sum_exp;

HwcnIndex HwcnIndex::build(const Hwcn& h) {
  HwcnIndex idx;
  for (size_t i = 0; i < h.nodes.size(); ++i) {
    idx.node_pos[h.nodes[i].id] = static_cast<int>(i);
  }
  idx.in_arcs.assign(h.nodes.size(), {});
  idx.out_arcs.assign(h.nodes.size(), {});
  for (size_t i = 0; i < h.arcs.size(); ++i) {
    const HwcnArc& a = h.arcs[i];
    idx.arc_pos[a.id] = static_cast<int>(i);
    idx.out_arcs[idx.node_pos.at(a.start_node)].push_back(static_cast<int>(i));
    idx.in_arcs[idx.node_pos.at(a.end_node)].push_back(static_cast<int>(i));
  }
  return idx;
}

HwcnArc merge_competing_arcs(std::span<const HwcnArc> arcs,
                             std::span<const double> start_node_log_priors) {
  if (arcs.empty()) throw ContractError("merge_competing_arcs: no arcs");
  if (arcs.size() != start_node_log_priors.size()) {
    throw ContractError("merge_competing_arcs: prior count mismatch");
  }
  if (arcs.size() == 1) return arcs[0];

  const HwcnArc& first = arcs[0];
  for (const HwcnArc& a : arcs) {
    if (a.word != first.word || a.start_node != first.start_node ||
        a.end_node != first.end_node) {
      throw ContractError(
          "merge_competing_arcs: arcs disagree on word or endpoints");
    }
  }

  const size_t n = arcs.size();
  HwcnArc out = first;

  std::vector<double> posts(n);
  std::vector<double> acoustics(n);
  for (size_t i = 0; i < n; ++i) {
    posts[i] = arcs[i].merged_log_posterior;
    acoustics[i] = arcs[i].merged_acoustic_logp;
  }
  // Posteriors of truly competing arcs sum to at most one; nonzero merge
  // tolerance can push the sum past one, so cap at probability one.
  out.merged_log_posterior = std::min(0.0, log_sum_exp(posts));
  out.merged_acoustic_logp =
      log_sum_exp(acoustics) - std::log(static_cast<double>(n));

  const double prior_total = log_sum_exp(start_node_log_priors);
  std::vector<double> weighted(n);
  for (size_t i = 0; i < n; ++i) {
    weighted[i] =
        arcs[i].merged_trans_logp + start_node_log_priors[i] - prior_total;
  }
  out.merged_trans_logp = std::min(0.0, log_sum_exp(weighted));

  std::set<int> provenance;
  out.pronunciation.clear();
  for (const HwcnArc& a : arcs) {
    provenance.insert(a.source_arc_ids.begin(), a.source_arc_ids.end());
    if (out.pronunciation.empty()) out.pronunciation = a.pronunciation;
  }
  out.source_arc_ids.assign(provenance.begin(), provenance.end());
  out.label.reset();
  out.confidence.reset();
  return out;
}

namespace {

// Node positions grouped into clusters by leader clustering over
// (time, id)-sorted nodes, then split until no arc has both endpoints inside
// one cluster.
std::vector<std::vector<int>> cluster_nodes(const Lattice& l,
                                            const LatticeIndex& idx,
                                            int tolerance_frames) {
  std::vector<int> sorted(l.nodes.size());
  for (size_t i = 0; i < sorted.size(); ++i) sorted[i] = static_cast<int>(i);
  std::sort(sorted.begin(), sorted.end(), [&](int a, int b) {
    if (l.nodes[a].time != l.nodes[b].time) {
      return l.nodes[a].time < l.nodes[b].time;
    }
    return l.nodes[a].id < l.nodes[b].id;
  });

  std::vector<std::vector<int>> clusters;
  for (int pos : sorted) {
    if (clusters.empty() ||
        l.nodes[pos].time >
            l.nodes[clusters.back().front()].time + tolerance_frames) {
      clusters.push_back({pos});
    } else {
      clusters.back().push_back(pos);
    }
  }

  // Split clusters that contain both endpoints of some arc: the earliest
  // offending end node starts a new cluster, and both halves are rechecked.
  std::vector<std::vector<int>> work(std::move(clusters));
  std::vector<std::vector<int>> done;
  while (!work.empty()) {
    std::vector<int> c = std::move(work.back());
    work.pop_back();
    std::unordered_map<int, int> member_rank;  // node position -> rank in c
    for (size_t r = 0; r < c.size(); ++r) member_rank[c[r]] = static_cast<int>(r);
    int split_rank = static_cast<int>(c.size());
    for (const Arc& a : l.arcs) {
      const auto s = member_rank.find(idx.node_pos.at(a.start_node));
      const auto e = member_rank.find(idx.node_pos.at(a.end_node));
      if (s != member_rank.end() && e != member_rank.end()) {
        split_rank = std::min(split_rank, e->second);
      }
    }
    if (split_rank == static_cast<int>(c.size())) {
      done.push_back(std::move(c));
    } else {
      work.emplace_back(c.begin(), c.begin() + split_rank);
      work.emplace_back(c.begin() + split_rank, c.end());
    }
  }
  std::sort(done.begin(), done.end(), [&](const auto& a, const auto& b) {
    const Node& na = l.nodes[a.front()];
    const Node& nb = l.nodes[b.front()];
    if (na.time != nb.time) return na.time < nb.time;
    return na.id < nb.id;
  });
  return done;
}

}  // namespace

Hwcn build_hwcn(const PosteriorLattice& p, int tolerance_frames) {
  if (tolerance_frames < 0) {
    throw ContractError("tolerance_frames must be non-negative");
  }
  const Lattice& l = p.lattice;
  if (p.arc_log_posterior.size() != l.arcs.size() ||
      p.node_log_prior.size() != l.nodes.size()) {
    throw ContractError("annotation does not match the lattice");
  }
  const LatticeIndex idx = LatticeIndex::build(l);

  const auto clusters = cluster_nodes(l, idx, tolerance_frames);
  std::vector<int> cluster_of(l.nodes.size(), -1);
  for (size_t ci = 0; ci < clusters.size(); ++ci) {
    for (int pos : clusters[ci]) cluster_of[pos] = static_cast<int>(ci);
  }

  Hwcn h;
  h.utterance_id = l.utterance_id;
  h.frame_ms = l.frame_ms;
  h.nodes.reserve(clusters.size());
  for (size_t ci = 0; ci < clusters.size(); ++ci) {
    // Cluster time is the leader's (earliest member's) time.
    h.nodes.push_back(
        {static_cast<int>(ci), l.nodes[clusters[ci].front()].time});
  }

  // Group lattice arcs by (merged start, merged end, word); each group
  // becomes one HWCN arc.
  struct Lifted {
    HwcnArc arc;
    double start_prior;
  };
  std::map<std::tuple<int, int, std::string>, std::vector<Lifted>> groups;
  for (size_t i = 0; i < l.arcs.size(); ++i) {
    const Arc& a = l.arcs[i];
    const int s = cluster_of[idx.node_pos.at(a.start_node)];
    const int e = cluster_of[idx.node_pos.at(a.end_node)];
    if (s == e) {
      throw ConstructionError(
          "node merge left arc " + std::to_string(a.id) +
          " as a self-loop in cluster " + std::to_string(s));
    }
    HwcnArc ha;
    ha.start_node = s;
    ha.end_node = e;
    ha.word = a.word;
    ha.merged_log_posterior = p.arc_log_posterior[i];
    ha.merged_acoustic_logp = a.acoustic_logp;
    ha.merged_trans_logp = a.trans_logp;
    ha.source_arc_ids = {a.id};
    ha.pronunciation = a.pronunciation;
    groups[{s, e, a.word}].push_back(
        {std::move(ha), p.node_log_prior[idx.node_pos.at(a.start_node)]});
  }

  int next_arc_id = 0;
  for (auto& [key, members] : groups) {
    std::sort(members.begin(), members.end(), [](const auto& a, const auto& b) {
      return a.arc.source_arc_ids.front() < b.arc.source_arc_ids.front();
    });
    std::vector<HwcnArc> arcs;
    std::vector<double> priors;
    arcs.reserve(members.size());
    for (const Lifted& m : members) {
      arcs.push_back(m.arc);
      priors.push_back(m.start_prior);
    }
    HwcnArc merged = merge_competing_arcs(arcs, priors);
    merged.id = next_arc_id++;
    h.arcs.push_back(std::move(merged));
  }

  int min_time_pos = 0;
  int max_time_pos = 0;
  for (size_t i = 1; i < h.nodes.size(); ++i) {
    if (h.nodes[i].time < h.nodes[min_time_pos].time) {
      min_time_pos = static_cast<int>(i);
    }
    if (h.nodes[i].time > h.nodes[max_time_pos].time) {
      max_time_pos = static_cast<int>(i);
    }
  }
  h.source_node_id = h.nodes[min_time_pos].id;
  h.sink_node_id = h.nodes[max_time_pos].id;

  try {
    validate_hwcn(h);
  } catch (const Error& e) {
    throw ConstructionError(std::string("node merge produced an invalid "
                                        "network: ") +
                            e.what());
  }
  recompute_onebest(h, p.acoustic_scale);
  return h;
}

void recompute_onebest(Hwcn& h, double acoustic_scale) {
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
  h.onebest_arc_ids.clear();
  for (int pos : path) h.onebest_arc_ids.push_back(h.arcs[pos].id);
}

Hwcn label_arcs(const Hwcn& h, const std::vector<std::string>& reference) {
  if (h.onebest_arc_ids.empty()) {
    throw ContractError("label_arcs requires onebest_arc_ids");
  }
  Hwcn out = h;
  for (HwcnArc& a : out.arcs) a.label = 0;

  const HwcnIndex idx = HwcnIndex::build(out);
  std::vector<int> onebest_word_arcs;  // arc positions, silence excluded
  std::vector<std::string> hyp;
  for (int arc_id : out.onebest_arc_ids) {
    const int pos = idx.arc_pos.at(arc_id);
    if (!out.arcs[pos].is_silence()) {
      onebest_word_arcs.push_back(pos);
      hyp.push_back(out.arcs[pos].word);
    }
  }

  const Alignment al = align(hyp, reference);
  if (al.matches() == 0) return out;  // no match at all: everything stays 0

  for (const AlignOp& op : al.ops) {
    if (op.kind != AlignKind::kMatch && op.kind != AlignKind::kSubstitute) {
      continue;
    }
    const HwcnArc& best = out.arcs[onebest_word_arcs[*op.hyp_index]];
    const std::string& ref_word = reference[*op.ref_index];
    for (int ci : idx.out_arcs[idx.node_pos.at(best.start_node)]) {
      HwcnArc& competing = out.arcs[ci];
      if (competing.end_node != best.end_node) continue;
      competing.label =
          (!competing.is_silence() && competing.word == ref_word) ? 1 : 0;
    }
  }
  return out;
}

std::vector<SegmentationView> enumerate_segmentations(const Hwcn& h,
                                                      int max_chains) {
  const HwcnIndex idx = HwcnIndex::build(h);
  const std::vector<int> order = internal::hwcn_topo_positions(h, idx);
  const int source = idx.node_pos.at(h.source_node_id);
  const int sink = idx.node_pos.at(h.sink_node_id);

  // Node-level successor sets (parallel arcs collapse into one edge).
  std::vector<std::vector<int>> succ(h.nodes.size());
  for (const HwcnArc& a : h.arcs) {
    succ[idx.node_pos.at(a.start_node)].push_back(
        idx.node_pos.at(a.end_node));
  }
  for (auto& s : succ) {
    std::sort(s.begin(), s.end(), [&](int a, int b) {
      return h.nodes[a].id < h.nodes[b].id;
    });
    s.erase(std::unique(s.begin(), s.end()), s.end());
  }

  // Chain count first, so the exponential case fails fast.
  std::vector<double> count(h.nodes.size(), 0.0);
  count[sink] = 1.0;
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    for (int u : succ[*it]) count[*it] += count[u];
  }
  if (count[source] > static_cast<double>(max_chains)) {
    throw EnumerationError("segmentation count " +
                           std::to_string(static_cast<long long>(count[source])) +
                           " exceeds cap " + std::to_string(max_chains));
  }

  // Arc ids per node pair.
  std::map<std::pair<int, int>, std::vector<int>> slot_arcs;
  for (const HwcnArc& a : h.arcs) {
    slot_arcs[{idx.node_pos.at(a.start_node), idx.node_pos.at(a.end_node)}]
        .push_back(a.id);
  }
  for (auto& [k, v] : slot_arcs) std::sort(v.begin(), v.end());

  std::vector<SegmentationView> views;
  std::vector<int> chain{source};
  auto dfs = [&](auto&& self, int v) -> void {
    if (v == sink) {
      SegmentationView view;
      for (size_t i = 0; i + 1 < chain.size(); ++i) {
        SegmentationView::Slot slot;
        slot.start_frame = h.nodes[chain[i]].time;
        slot.end_frame = h.nodes[chain[i + 1]].time;
        slot.arc_ids = slot_arcs.at({chain[i], chain[i + 1]});
        view.slots.push_back(std::move(slot));
      }
      views.push_back(std::move(view));
      return;
    }
    for (int u : succ[v]) {
      chain.push_back(u);
      self(self, u);
      chain.pop_back();
    }
  };
  dfs(dfs, source);
  return views;
}

void validate_hwcn(const Hwcn& h) {
  if (h.nodes.empty()) throw ValidationError("network has no nodes");
  std::unordered_map<int, int> node_pos;
  for (size_t i = 0; i < h.nodes.size(); ++i) {
    if (h.nodes[i].time < 0) throw ValidationError("negative node time");
    if (!node_pos.emplace(h.nodes[i].id, static_cast<int>(i)).second) {
      throw ValidationError("duplicate node id " +
                            std::to_string(h.nodes[i].id));
    }
  }
  std::set<int> arc_ids;
  std::set<std::tuple<int, int, std::string>> arc_keys;
  std::vector<int> in_degree(h.nodes.size(), 0);
  std::vector<int> out_degree(h.nodes.size(), 0);
  for (const HwcnArc& a : h.arcs) {
    if (!arc_ids.insert(a.id).second) {
      throw ValidationError("duplicate arc id " + std::to_string(a.id));
    }
    const auto s = node_pos.find(a.start_node);
    const auto e = node_pos.find(a.end_node);
    if (s == node_pos.end() || e == node_pos.end()) {
      throw ValidationError("dangling node reference (arc " +
                            std::to_string(a.id) + ")");
    }
    if (a.word.empty()) {
      throw ValidationError("empty word (arc " + std::to_string(a.id) + ")");
    }
    if (h.nodes[s->second].time >= h.nodes[e->second].time) {
      throw ValidationError("non-positive arc duration (arc " +
                            std::to_string(a.id) + ")");
    }
    if (!arc_keys.insert({a.start_node, a.end_node, a.word}).second) {
      throw ValidationError("unmerged competing duplicate (arc " +
                            std::to_string(a.id) + ")");
    }
    if (a.source_arc_ids.empty()) {
      throw ValidationError("empty provenance (arc " + std::to_string(a.id) +
                            ")");
    }
    if (a.merged_log_posterior > 1e-9) {
      throw ValidationError("positive merged log posterior (arc " +
                            std::to_string(a.id) + ")");
    }
    if (a.confidence && (*a.confidence < 0.0 || *a.confidence > 1.0)) {
      throw ValidationError("confidence outside [0,1] (arc " +
                            std::to_string(a.id) + ")");
    }
    if (a.label && *a.label != 0 && *a.label != 1) {
      throw ValidationError("label outside {0,1} (arc " + std::to_string(a.id) +
                            ")");
    }
    ++out_degree[s->second];
    ++in_degree[e->second];
  }
  int source_pos = -1;
  int sink_pos = -1;
  for (size_t i = 0; i < h.nodes.size(); ++i) {
    if (in_degree[i] == 0) {
      if (source_pos >= 0) throw ValidationError("multiple sources");
      source_pos = static_cast<int>(i);
    }
    if (out_degree[i] == 0) {
      if (sink_pos >= 0) throw ValidationError("multiple sinks");
      sink_pos = static_cast<int>(i);
    }
  }
  if (source_pos < 0 || sink_pos < 0) throw ValidationError("cycle detected");
  if (h.nodes[source_pos].id != h.source_node_id) {
    throw ValidationError("source_node_id mismatch");
  }
  if (h.nodes[sink_pos].id != h.sink_node_id) {
    throw ValidationError("sink_node_id mismatch");
  }
}

Hwcn parse_hwcn(const std::string& text) {
  // Reuse the base parser layout by scanning lines here; the extended arc
  // fields make the formats diverge enough that sharing the lattice parser
  // body is not worth the coupling.
  Hwcn h;
  std::vector<std::pair<int, std::string>> lines;
  {
    int line_no = 0;
    size_t start = 0;
    for (size_t i = 0; i <= text.size(); ++i) {
      if (i == text.size() || text[i] == '\n') {
        ++line_no;
        std::string line = text.substr(start, i - start);
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (!line.empty()) lines.emplace_back(line_no, line);
        start = i + 1;
      }
    }
  }
  if (lines.size() < 2) throw ParseError("truncated network: missing header");
  {
    const auto& [ln, line] = lines[0];
    const auto tok = util::split_whitespace(line);
    if (tok.size() != 4 || tok[0] != "UTT" || tok[2] != "FRAME_MS") {
      throw ParseError("malformed header, expected 'UTT <id> FRAME_MS <int>'",
                       ln);
    }
    h.utterance_id = tok[1];
    h.frame_ms = util::parse_int(tok[3], "FRAME_MS", ln);
  }
  size_t node_count = 0;
  size_t arc_count = 0;
  {
    const auto& [ln, line] = lines[1];
    const auto tok = util::split_whitespace(line);
    if (tok.size() != 4 || tok[0] != "N" || tok[2] != "A") {
      throw ParseError("malformed count line, expected 'N <int> A <int>'", ln);
    }
    node_count = static_cast<size_t>(util::parse_int(tok[1], "node count", ln));
    arc_count = static_cast<size_t>(util::parse_int(tok[3], "arc count", ln));
  }
  for (size_t i = 2; i < lines.size(); ++i) {
    const auto& [ln, line] = lines[i];
    const auto tok = util::split_whitespace(line);
    if (tok[0] == "I") {
      if (tok.size() != 3 || !tok[2].starts_with("t=")) {
        throw ParseError("malformed node line", ln);
      }
      Node n;
      n.id = util::parse_int(tok[1], "node id", ln);
      n.time = util::parse_int(std::string_view(tok[2]).substr(2), "node time",
                               ln);
      h.nodes.push_back(n);
    } else if (tok[0] == "J") {
      if (tok.size() < 8) throw ParseError("malformed arc line", ln);
      HwcnArc a;
      a.id = util::parse_int(tok[1], "arc id", ln);
      bool have_posterior = false;
      for (size_t t = 2; t < tok.size(); ++t) {
        const std::string_view tv(tok[t]);
        if (tv.starts_with("S=")) {
          a.start_node = util::parse_int(tv.substr(2), "start node", ln);
        } else if (tv.starts_with("E=")) {
          a.end_node = util::parse_int(tv.substr(2), "end node", ln);
        } else if (tv.starts_with("W=")) {
          a.word = std::string(tv.substr(2));
        } else if (tv.starts_with("a=")) {
          a.merged_acoustic_logp =
              util::parse_double(tv.substr(2), "acoustic score", ln);
        } else if (tv.starts_with("l=")) {
          a.merged_trans_logp =
              util::parse_double(tv.substr(2), "transitional score", ln);
        } else if (tv.starts_with("P=")) {
          a.merged_log_posterior =
              util::parse_double(tv.substr(2), "merged posterior", ln);
          have_posterior = true;
        } else if (tv.starts_with("p=")) {
          a.pronunciation = std::string(tv.substr(2));
        } else if (tv.starts_with("L=")) {
          a.label = util::parse_int(tv.substr(2), "label", ln);
        } else if (tv.starts_with("C=")) {
          a.confidence = util::parse_double(tv.substr(2), "confidence", ln);
        } else {
          throw ParseError("unknown arc field '" + std::string(tv) + "'", ln);
        }
      }
      if (!have_posterior) {
        throw ParseError("arc line missing P= field", ln);
      }
      // Provenance is not persisted; a reloaded network owns its arcs.
      a.source_arc_ids = {a.id};
      h.arcs.push_back(std::move(a));
    } else {
      throw ParseError("unexpected line type '" + tok[0] + "'", ln);
    }
  }
  if (h.nodes.size() != node_count) {
    throw ParseError("node count mismatch");
  }
  if (h.arcs.size() != arc_count) {
    throw ParseError("arc count mismatch");
  }

  std::unordered_map<int, int> in_degree;
  std::unordered_map<int, int> out_degree;
  for (const Node& n : h.nodes) {
    in_degree[n.id];
    out_degree[n.id];
  }
  for (const HwcnArc& a : h.arcs) {
    if (in_degree.count(a.start_node)) ++out_degree[a.start_node];
    if (in_degree.count(a.end_node)) ++in_degree[a.end_node];
  }
  for (const Node& n : h.nodes) {
    if (in_degree[n.id] == 0) h.source_node_id = n.id;
    if (out_degree[n.id] == 0) h.sink_node_id = n.id;
  }
  validate_hwcn(h);
  return h;
}

std::string serialize_hwcn(const Hwcn& h) {
  std::vector<Node> nodes = h.nodes;
  std::sort(nodes.begin(), nodes.end(),
            [](const Node& a, const Node& b) { return a.id < b.id; });
  std::vector<const HwcnArc*> arcs;
  arcs.reserve(h.arcs.size());
  for (const HwcnArc& a : h.arcs) arcs.push_back(&a);
  std::sort(arcs.begin(), arcs.end(),
            [](const HwcnArc* a, const HwcnArc* b) { return a->id < b->id; });

  std::string out;
  out += "UTT " + h.utterance_id + " FRAME_MS " + std::to_string(h.frame_ms) +
         "\n";
  out += "N " + std::to_string(nodes.size()) + " A " +
         std::to_string(arcs.size()) + "\n";
  for (const Node& n : nodes) {
    out += "I " + std::to_string(n.id) + " t=" + std::to_string(n.time) + "\n";
  }
  for (const HwcnArc* a : arcs) {
    out += "J " + std::to_string(a->id) + " S=" + std::to_string(a->start_node) +
           " E=" + std::to_string(a->end_node) + " W=" + a->word +
           " a=" + util::format_fixed6(a->merged_acoustic_logp) +
           " l=" + util::format_fixed6(a->merged_trans_logp) +
           " P=" + util::format_fixed6(a->merged_log_posterior);
    if (!a->pronunciation.empty()) out += " p=" + a->pronunciation;
    if (a->label) out += " L=" + std::to_string(*a->label);
    if (a->confidence) out += " C=" + util::format_fixed6(*a->confidence);
    out += "\n";
  }
  return out;
}

bool operator==(const HwcnArc& a, const HwcnArc& b) {
  return a.id == b.id && a.start_node == b.start_node &&
         a.end_node == b.end_node && a.word == b.word &&
         a.merged_log_posterior == b.merged_log_posterior &&
         a.merged_acoustic_logp == b.merged_acoustic_logp &&
         a.merged_trans_logp == b.merged_trans_logp &&
         a.source_arc_ids == b.source_arc_ids &&
         a.pronunciation == b.pronunciation && a.label == b.label &&
         a.confidence == b.confidence;
}

bool operator==(const Hwcn& a, const Hwcn& b) {
  return a.utterance_id == b.utterance_id && a.frame_ms == b.frame_ms &&
         a.nodes == b.nodes && a.arcs == b.arcs &&
         a.source_node_id == b.source_node_id &&
         a.sink_node_id == b.sink_node_id &&
         a.onebest_arc_ids == b.onebest_arc_ids;
}

}  // namespace latconf
