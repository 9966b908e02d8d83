#include "latconf/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <set>
#include <sstream>

#include "latconf/error.hpp"
#include "latconf/util.hpp"

namespace latconf {

using util::split_whitespace;

LatticeIndex LatticeIndex::build(const Lattice& l) {
  LatticeIndex idx;
  idx.node_pos.reserve(l.nodes.size());
  for (size_t i = 0; i < l.nodes.size(); ++i) {
    idx.node_pos[l.nodes[i].id] = static_cast<int>(i);
  }
  idx.arc_pos.reserve(l.arcs.size());
  idx.in_arcs.assign(l.nodes.size(), {});
  idx.out_arcs.assign(l.nodes.size(), {});
  for (size_t i = 0; i < l.arcs.size(); ++i) {
    const Arc& a = l.arcs[i];
    idx.arc_pos[a.id] = static_cast<int>(i);
    idx.out_arcs[idx.node_pos.at(a.start_node)].push_back(static_cast<int>(i));
    idx.in_arcs[idx.node_pos.at(a.end_node)].push_back(static_cast<int>(i));
  }
  return idx;
}

void validate_lattice(const Lattice& l) {
  if (l.frame_ms <= 0) throw ValidationError("frame_ms must be positive");
  if (l.nodes.empty()) throw ValidationError("lattice has no nodes");
  if (l.utterance_id.empty()) throw ValidationError("empty utterance id");

  std::unordered_map<int, int> node_pos;
  for (size_t i = 0; i < l.nodes.size(); ++i) {
    const Node& n = l.nodes[i];
    if (n.time < 0) {
      throw ValidationError("negative node time (node " +
                            std::to_string(n.id) + ")");
    }
    if (!node_pos.emplace(n.id, static_cast<int>(i)).second) {
      throw ValidationError("duplicate node id " + std::to_string(n.id));
    }
  }

  std::set<int> arc_ids;
  std::vector<int> in_degree(l.nodes.size(), 0);
  std::vector<int> out_degree(l.nodes.size(), 0);
  for (const Arc& a : l.arcs) {
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
    if (a.word.find_first_of(" \t\n") != std::string::npos) {
      throw ValidationError("word contains whitespace (arc " +
                            std::to_string(a.id) + ")");
    }
    if (!std::isfinite(a.acoustic_logp) || !std::isfinite(a.trans_logp)) {
      throw ValidationError("non-finite score (arc " + std::to_string(a.id) +
                            ")");
    }
    if (a.trans_logp > 0.0) {
      throw ValidationError("positive transitional log-probability (arc " +
                            std::to_string(a.id) + ")");
    }
    if (l.nodes[s->second].time >= l.nodes[e->second].time) {
      throw ValidationError("non-positive arc duration (arc " +
                            std::to_string(a.id) + ")");
    }
    ++out_degree[s->second];
    ++in_degree[e->second];
  }

  int source_pos = -1;
  int sink_pos = -1;
  for (size_t i = 0; i < l.nodes.size(); ++i) {
    if (in_degree[i] == 0) {
      if (source_pos >= 0) throw ValidationError("multiple sources");
      source_pos = static_cast<int>(i);
    }
    if (out_degree[i] == 0) {
      if (sink_pos >= 0) throw ValidationError("multiple sinks");
      sink_pos = static_cast<int>(i);
    }
  }
  if (source_pos < 0) throw ValidationError("cycle detected (no source)");
  if (sink_pos < 0) throw ValidationError("cycle detected (no sink)");
  if (l.nodes[source_pos].id != l.source_node_id) {
    throw ValidationError("source_node_id does not match the in-degree-0 node");
  }
  if (l.nodes[sink_pos].id != l.sink_node_id) {
    throw ValidationError("sink_node_id does not match the out-degree-0 node");
  }

  // Strictly positive arc durations already rule out cycles; this pass checks
  // that every node is reachable from the source and co-reachable from the
  // sink.
  const LatticeIndex idx = LatticeIndex::build(l);
  std::vector<char> fwd(l.nodes.size(), 0);
  std::vector<char> bwd(l.nodes.size(), 0);
  std::vector<int> stack{source_pos};
  fwd[source_pos] = 1;
  while (!stack.empty()) {
    const int v = stack.back();
    stack.pop_back();
    for (int ai : idx.out_arcs[v]) {
      const int u = idx.node_pos.at(l.arcs[ai].end_node);
      if (!fwd[u]) {
        fwd[u] = 1;
        stack.push_back(u);
      }
    }
  }
  stack = {sink_pos};
  bwd[sink_pos] = 1;
  while (!stack.empty()) {
    const int v = stack.back();
    stack.pop_back();
    for (int ai : idx.in_arcs[v]) {
      const int u = idx.node_pos.at(l.arcs[ai].start_node);
      if (!bwd[u]) {
        bwd[u] = 1;
        stack.push_back(u);
      }
    }
  }
  for (size_t i = 0; i < l.nodes.size(); ++i) {
    if (!fwd[i] || !bwd[i]) {
      throw ValidationError("node " + std::to_string(l.nodes[i].id) +
                            " not on any source-to-sink path");
    }
  }
}

namespace {

// Shared line scanner for the lattice and HWCN text formats. Splits the text
// into non-empty lines with their 1-based numbers.
std::vector<std::pair<int, std::string>> scan_lines(const std::string& text) {
  std::vector<std::pair<int, std::string>> lines;
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
  return lines;
}

std::string_view field_value(std::string_view token, std::string_view key,
                             int line) {
  if (!token.starts_with(key)) {
    throw ParseError("expected field '" + std::string(key) + "', got '" +
                         std::string(token) + "'",
                     line);
  }
  return token.substr(key.size());
}

}  // namespace

Lattice parse_lattice(const std::string& text) {
  const auto lines = scan_lines(text);
  if (lines.size() < 2) throw ParseError("truncated lattice: missing header");

  Lattice l;
  {
    const auto& [ln, line] = lines[0];
    const auto tok = split_whitespace(line);
    if (tok.size() != 4 || tok[0] != "UTT" || tok[2] != "FRAME_MS") {
      throw ParseError("malformed header, expected 'UTT <id> FRAME_MS <int>'",
                       ln);
    }
    l.utterance_id = tok[1];
    l.frame_ms = util::parse_int(tok[3], "FRAME_MS", ln);
  }
  size_t node_count = 0;
  size_t arc_count = 0;
  {
    const auto& [ln, line] = lines[1];
    const auto tok = split_whitespace(line);
    if (tok.size() != 4 || tok[0] != "N" || tok[2] != "A") {
      throw ParseError("malformed count line, expected 'N <int> A <int>'", ln);
    }
    node_count = static_cast<size_t>(util::parse_int(tok[1], "node count", ln));
    arc_count = static_cast<size_t>(util::parse_int(tok[3], "arc count", ln));
  }

  for (size_t i = 2; i < lines.size(); ++i) {
    const auto& [ln, line] = lines[i];
    const auto tok = split_whitespace(line);
    if (tok[0] == "I") {
      if (tok.size() != 3) throw ParseError("malformed node line", ln);
      Node n;
      n.id = util::parse_int(tok[1], "node id", ln);
      n.time = util::parse_int(field_value(tok[2], "t=", ln), "node time", ln);
      l.nodes.push_back(n);
    } else if (tok[0] == "J") {
      if (tok.size() < 7 || tok.size() > 8) {
        throw ParseError("malformed arc line", ln);
      }
      Arc a;
      a.id = util::parse_int(tok[1], "arc id", ln);
      a.start_node =
          util::parse_int(field_value(tok[2], "S=", ln), "start node", ln);
      a.end_node =
          util::parse_int(field_value(tok[3], "E=", ln), "end node", ln);
      a.word = std::string(field_value(tok[4], "W=", ln));
      a.acoustic_logp = util::parse_double(field_value(tok[5], "a=", ln),
                                           "acoustic score", ln);
      a.trans_logp = util::parse_double(field_value(tok[6], "l=", ln),
                                        "transitional score", ln);
      if (tok.size() == 8) {
        a.pronunciation = std::string(field_value(tok[7], "p=", ln));
      }
      l.arcs.push_back(a);
    } else {
      throw ParseError("unexpected line type '" + tok[0] + "'", ln);
    }
  }

  if (l.nodes.size() != node_count) {
    throw ParseError("node count mismatch: header says " +
                     std::to_string(node_count) + ", found " +
                     std::to_string(l.nodes.size()));
  }
  if (l.arcs.size() != arc_count) {
    throw ParseError("arc count mismatch: header says " +
                     std::to_string(arc_count) + ", found " +
                     std::to_string(l.arcs.size()));
  }

  // Derive source/sink from degrees, then let validation confirm uniqueness.
  std::unordered_map<int, int> in_degree;
  std::unordered_map<int, int> out_degree;
  for (const Node& n : l.nodes) {
    in_degree[n.id];
    out_degree[n.id];
  }
  for (const Arc& a : l.arcs) {
    if (in_degree.count(a.start_node)) ++out_degree[a.start_node];
    if (in_degree.count(a.end_node)) ++in_degree[a.end_node];
  }
  for (const Node& n : l.nodes) {
    if (in_degree[n.id] == 0) l.source_node_id = n.id;
    if (out_degree[n.id] == 0) l.sink_node_id = n.id;
  }

  validate_lattice(l);
  return l;
}

std::string serialize_lattice(const Lattice& l) {
  std::vector<Node> nodes = l.nodes;
  std::sort(nodes.begin(), nodes.end(),
            [](const Node& a, const Node& b) { return a.id < b.id; });
  std::vector<Arc> arcs = l.arcs;
  std::sort(arcs.begin(), arcs.end(),
            [](const Arc& a, const Arc& b) { return a.id < b.id; });

  std::string out;
  out += "UTT " + l.utterance_id + " FRAME_MS " + std::to_string(l.frame_ms) +
         "\n";
  out += "N " + std::to_string(nodes.size()) + " A " +
         std::to_string(arcs.size()) + "\n";
  for (const Node& n : nodes) {
    out += "I " + std::to_string(n.id) + " t=" + std::to_string(n.time) + "\n";
  }
  for (const Arc& a : arcs) {
    out += "J " + std::to_string(a.id) + " S=" + std::to_string(a.start_node) +
           " E=" + std::to_string(a.end_node) + " W=" + a.word +
           " a=" + util::format_fixed6(a.acoustic_logp) +
           " l=" + util::format_fixed6(a.trans_logp);
    if (!a.pronunciation.empty()) out += " p=" + a.pronunciation;
    out += "\n";
  }
  return out;
}

std::vector<int> topological_order(const Lattice& l) {
  const LatticeIndex idx = LatticeIndex::build(l);
  std::vector<int> in_degree(l.nodes.size(), 0);
  for (const Arc& a : l.arcs) ++in_degree[idx.node_pos.at(a.end_node)];

  // Min-heap on (time, id) for deterministic tie-breaking.
  using Key = std::pair<std::pair<int, int>, int>;  // ((time, id), position)
  std::priority_queue<Key, std::vector<Key>, std::greater<>> ready;
  for (size_t i = 0; i < l.nodes.size(); ++i) {
    if (in_degree[i] == 0) {
      ready.push({{l.nodes[i].time, l.nodes[i].id}, static_cast<int>(i)});
    }
  }
  std::vector<int> order;
  order.reserve(l.nodes.size());
  while (!ready.empty()) {
    const int pos = ready.top().second;
    ready.pop();
    order.push_back(l.nodes[pos].id);
    for (int ai : idx.out_arcs[pos]) {
      const int end_pos = idx.node_pos.at(l.arcs[ai].end_node);
      if (--in_degree[end_pos] == 0) {
        ready.push(
            {{l.nodes[end_pos].time, l.nodes[end_pos].id}, end_pos});
      }
    }
  }
  if (order.size() != l.nodes.size()) {
    throw ValidationError("cycle detected");
  }
  return order;
}

bool operator==(const Node& a, const Node& b) {
  return a.id == b.id && a.time == b.time;
}

bool operator==(const Arc& a, const Arc& b) {
  return a.id == b.id && a.start_node == b.start_node &&
         a.end_node == b.end_node && a.word == b.word &&
         a.acoustic_logp == b.acoustic_logp && a.trans_logp == b.trans_logp &&
         a.pronunciation == b.pronunciation;
}

bool operator==(const Lattice& a, const Lattice& b) {
  return a.utterance_id == b.utterance_id && a.frame_ms == b.frame_ms &&
         a.nodes == b.nodes && a.arcs == b.arcs &&
         a.source_node_id == b.source_node_id &&
         a.sink_node_id == b.sink_node_id;
}

}  // namespace latconf
