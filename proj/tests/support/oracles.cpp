#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "latconf/posterior.hpp"
#include "latconf/util.hpp"

namespace latconf::testing {

namespace {

int edit_rec(const std::vector<std::string>& a,
             const std::vector<std::string>& b, size_t i, size_t j,
             std::vector<int>& memo) {
  if (i == a.size()) return static_cast<int>(b.size() - j);
  if (j == b.size()) return static_cast<int>(a.size() - i);
  int& slot = memo[i * (b.size() + 1) + j];
  if (slot >= 0) return slot;
  int best = edit_rec(a, b, i + 1, j + 1, memo) + (a[i] == b[j] ? 0 : 1);
  best = std::min(best, edit_rec(a, b, i + 1, j, memo) + 1);
  best = std::min(best, edit_rec(a, b, i, j + 1, memo) + 1);
  slot = best;
  return best;
}

}  // namespace

int edit_distance_oracle(const std::vector<std::string>& hyp,
                         const std::vector<std::string>& ref) {
  std::vector<int> memo((hyp.size() + 1) * (ref.size() + 1), -1);
  return edit_rec(hyp, ref, 0, 0, memo);
}

std::vector<EnumeratedPath> enumerate_lattice_paths(const Lattice& l) {
  const LatticeIndex idx = LatticeIndex::build(l);
  const int source = idx.node_pos.at(l.source_node_id);
  const int sink = idx.node_pos.at(l.sink_node_id);
  std::vector<EnumeratedPath> paths;
  EnumeratedPath cur;
  auto dfs = [&](auto&& self, int v) -> void {
    if (v == sink) {
      paths.push_back(cur);
      return;
    }
    for (int ai : idx.out_arcs[v]) {
      const Arc& a = l.arcs[ai];
      cur.arc_positions.push_back(ai);
      if (!a.is_silence()) cur.words.push_back(a.word);
      self(self, idx.node_pos.at(a.end_node));
      cur.arc_positions.pop_back();
      if (!a.is_silence()) cur.words.pop_back();
    }
  };
  dfs(dfs, source);
  return paths;
}

std::vector<EnumeratedPath> enumerate_hwcn_paths(const Hwcn& h) {
  const HwcnIndex idx = HwcnIndex::build(h);
  const int source = idx.node_pos.at(h.source_node_id);
  const int sink = idx.node_pos.at(h.sink_node_id);
  std::vector<EnumeratedPath> paths;
  EnumeratedPath cur;
  auto dfs = [&](auto&& self, int v) -> void {
    if (v == sink) {
      paths.push_back(cur);
      return;
    }
    for (int ai : idx.out_arcs[v]) {
      const HwcnArc& a = h.arcs[ai];
      cur.arc_positions.push_back(ai);
      if (!a.is_silence()) cur.words.push_back(a.word);
      self(self, idx.node_pos.at(a.end_node));
      cur.arc_positions.pop_back();
      if (!a.is_silence()) cur.words.pop_back();
    }
  };
  dfs(dfs, source);
  return paths;
}

std::vector<double> arc_posteriors_by_enumeration(const Lattice& l,
                                                  double acoustic_scale) {
  const auto paths = enumerate_lattice_paths(l);
  std::vector<double> path_scores(paths.size());
  double max_score = -1e300;
  for (size_t p = 0; p < paths.size(); ++p) {
    double s = 0.0;
    for (int ai : paths[p].arc_positions) {
      s += acoustic_scale * l.arcs[ai].acoustic_logp + l.arcs[ai].trans_logp;
    }
    path_scores[p] = s;
    max_score = std::max(max_score, s);
  }
  double total = 0.0;
  for (double s : path_scores) total += std::exp(s - max_score);

  std::vector<double> post(l.arcs.size(), 0.0);
  for (size_t p = 0; p < paths.size(); ++p) {
    const double w = std::exp(path_scores[p] - max_score) / total;
    for (int ai : paths[p].arc_positions) post[ai] += w;
  }
  return post;
}

namespace {

// (primary desc, arcs asc, words lex asc) over enumerated paths.
const EnumeratedPath* pick_best(
    const std::vector<EnumeratedPath>& paths,
    const std::vector<double>& primary) {
  const EnumeratedPath* best = nullptr;
  double best_primary = 0.0;
  for (size_t p = 0; p < paths.size(); ++p) {
    if (!best) {
      best = &paths[p];
      best_primary = primary[p];
      continue;
    }
    if (primary[p] != best_primary) {
      if (primary[p] > best_primary) {
        best = &paths[p];
        best_primary = primary[p];
      }
      continue;
    }
    if (paths[p].arc_positions.size() != best->arc_positions.size()) {
      if (paths[p].arc_positions.size() < best->arc_positions.size()) {
        best = &paths[p];
      }
      continue;
    }
    if (std::lexicographical_compare(paths[p].words.begin(),
                                     paths[p].words.end(),
                                     best->words.begin(), best->words.end())) {
      best = &paths[p];
    }
  }
  return best;
}

}  // namespace

std::vector<int> max_mean_path_oracle(const Hwcn& h) {
  const auto paths = enumerate_hwcn_paths(h);
  std::vector<double> mean(paths.size(), 0.0);
  for (size_t p = 0; p < paths.size(); ++p) {
    double sum = 0.0;
    int n = 0;
    for (int ai : paths[p].arc_positions) {
      if (h.arcs[ai].is_silence()) continue;
      sum += h.arcs[ai].confidence.value();
      ++n;
    }
    mean[p] = n > 0 ? sum / n : 0.0;
  }
  return pick_best(paths, mean)->arc_positions;
}

std::vector<int> map_path_oracle(const Hwcn& h, double acoustic_scale) {
  const auto paths = enumerate_hwcn_paths(h);
  std::vector<double> score(paths.size(), 0.0);
  for (size_t p = 0; p < paths.size(); ++p) {
    for (int ai : paths[p].arc_positions) {
      score[p] += acoustic_scale * h.arcs[ai].merged_acoustic_logp +
                  h.arcs[ai].merged_trans_logp;
    }
  }
  return pick_best(paths, score)->arc_positions;
}

long long count_node_chains_oracle(const Hwcn& h) {
  const HwcnIndex idx = HwcnIndex::build(h);
  const int source = idx.node_pos.at(h.source_node_id);
  const int sink = idx.node_pos.at(h.sink_node_id);
  std::vector<std::set<int>> succ(h.nodes.size());
  for (const HwcnArc& a : h.arcs) {
    succ[idx.node_pos.at(a.start_node)].insert(idx.node_pos.at(a.end_node));
  }
  long long count = 0;
  auto dfs = [&](auto&& self, int v) -> void {
    if (v == sink) {
      ++count;
      return;
    }
    for (int u : succ[v]) self(self, u);
  };
  dfs(dfs, source);
  return count;
}

bool hwcn_admits_tokens(const Hwcn& h, const std::vector<std::string>& tokens) {
  const HwcnIndex idx = HwcnIndex::build(h);
  const int source = idx.node_pos.at(h.source_node_id);
  const int sink = idx.node_pos.at(h.sink_node_id);
  const size_t n = tokens.size();
  // reachable[v] holds the set of token counts consumable on some path from
  // the source to v.
  std::vector<std::set<size_t>> reachable(h.nodes.size());
  reachable[source].insert(0);
  std::vector<int> order(h.nodes.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    if (h.nodes[a].time != h.nodes[b].time) {
      return h.nodes[a].time < h.nodes[b].time;
    }
    return h.nodes[a].id < h.nodes[b].id;
  });
  for (int v : order) {
    for (int ai : idx.out_arcs[v]) {
      const HwcnArc& a = h.arcs[ai];
      const int u = idx.node_pos.at(a.end_node);
      for (size_t k : reachable[v]) {
        if (k < n && tokens[k] == a.word) reachable[u].insert(k + 1);
      }
    }
  }
  return reachable[sink].count(n) > 0;
}

double logistic_kde_oracle(const std::vector<double>& centers, double y,
                           double l_scale) {
  double sum = 0.0;
  for (double c : centers) {
    const double e = std::exp((c - y) * l_scale);
    sum += l_scale * e / ((1.0 + e) * (1.0 + e));
  }
  return sum / static_cast<double>(centers.size());
}

double eer_oracle(const std::vector<std::pair<double, int>>& scores) {
  long long n_pos = 0;
  long long n_neg = 0;
  for (const auto& [s, l] : scores) (l == 1 ? n_pos : n_neg) += 1;

  std::vector<double> thresholds;
  for (const auto& [s, l] : scores) thresholds.push_back(s);
  std::sort(thresholds.begin(), thresholds.end());
  thresholds.erase(std::unique(thresholds.begin(), thresholds.end()),
                   thresholds.end());
  thresholds.push_back(thresholds.back() + 1.0);

  auto p_miss = [&](double t) {
    long long k = 0;
    for (const auto& [s, l] : scores) {
      if (l == 1 && s < t) ++k;
    }
    return static_cast<double>(k) / n_pos;
  };
  auto p_fa = [&](double t) {
    long long k = 0;
    for (const auto& [s, l] : scores) {
      if (l == 0 && s >= t) ++k;
    }
    return static_cast<double>(k) / n_neg;
  };

  for (double t : thresholds) {
    if (p_miss(t) == p_fa(t)) return p_miss(t);
  }
  for (size_t i = 0; i + 1 < thresholds.size(); ++i) {
    const double d0 = p_miss(thresholds[i]) - p_fa(thresholds[i]);
    const double d1 = p_miss(thresholds[i + 1]) - p_fa(thresholds[i + 1]);
    if (d0 < 0.0 && d1 > 0.0) {
      const double alpha = -d0 / (d1 - d0);
      return p_miss(thresholds[i]) +
             alpha * (p_miss(thresholds[i + 1]) - p_miss(thresholds[i]));
    }
  }
  return 0.5;
}

Lattice random_lattice(uint64_t seed, int max_nodes) {
  util::Rng rng(seed);
  const int n = rng.uniform_int(4, max_nodes);
  static const char* kWords[] = {"alpha", "bravo", "echo", "delta", "lima"};

  Lattice l;
  l.utterance_id = "rand_" + std::to_string(seed);
  l.frame_ms = 10;
  // Non-decreasing times with occasional interior ties; the first increment
  // is always positive and the last tie is avoided, so source and sink have
  // strictly extreme times.
  int t = 0;
  for (int i = 0; i < n; ++i) {
    l.nodes.push_back({i, t});
    const bool tie = i > 0 && i + 2 < n && rng.uniform() < 0.25;
    if (!tie) t += rng.uniform_int(5, 25);
  }
  if (l.nodes[n - 1].time == l.nodes[n - 2].time) l.nodes[n - 1].time += 7;

  auto word = [&]() -> std::string {
    if (rng.uniform() < 0.12) return kSilenceWord;
    return kWords[rng.uniform_int(0, 4)];
  };
  auto add_arc = [&](int s, int e) {
    Arc a;
    a.id = static_cast<int>(l.arcs.size());
    a.start_node = s;
    a.end_node = e;
    a.word = word();
    a.acoustic_logp = rng.uniform(-6.0, -0.5);
    a.trans_logp = std::log(rng.uniform(0.05, 1.0));
    l.arcs.push_back(std::move(a));
  };
  auto pick_earlier = [&](int i) {
    std::vector<int> earlier;
    for (int j = 0; j < i; ++j) {
      if (l.nodes[j].time < l.nodes[i].time) earlier.push_back(j);
    }
    return earlier[rng.uniform_int(0, static_cast<int>(earlier.size()) - 1)];
  };
  auto pick_later = [&](int i) {
    std::vector<int> later;
    for (int j = i + 1; j < n; ++j) {
      if (l.nodes[j].time > l.nodes[i].time) later.push_back(j);
    }
    return later[rng.uniform_int(0, static_cast<int>(later.size()) - 1)];
  };

  // Incoming connectivity: every non-source node hooks to a strictly earlier
  // node; induction keeps all nodes reachable from the source.
  for (int i = 1; i < n; ++i) add_arc(pick_earlier(i), i);
  // Outgoing connectivity toward the sink.
  for (int i = 0; i < n - 1; ++i) {
    bool has_out = false;
    for (const Arc& a : l.arcs) {
      if (a.start_node == i) {
        has_out = true;
        break;
      }
    }
    if (!has_out) add_arc(i, pick_later(i));
  }
  // Extra arcs, sometimes duplicating an existing (start, end, word) triple.
  const int extra = rng.uniform_int(0, n);
  for (int k = 0; k < extra; ++k) {
    const int i = rng.uniform_int(0, n - 2);
    add_arc(i, pick_later(i));
  }

  l.source_node_id = 0;
  l.sink_node_id = n - 1;
  validate_lattice(l);
  return l;
}

Hwcn random_scored_hwcn(uint64_t seed, int max_nodes) {
  const Lattice l = random_lattice(seed, max_nodes);
  const PosteriorLattice p = forward_backward(l, 1.0);
  util::Rng rng(seed ^ 0x5c0bedull);
  const int tolerance = rng.uniform() < 0.5 ? 0 : rng.uniform_int(1, 6);
  Hwcn h = build_hwcn(p, tolerance);
  for (HwcnArc& a : h.arcs) a.confidence = rng.uniform(0.01, 0.99);
  return h;
}

}  // namespace latconf::testing
