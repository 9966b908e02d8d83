#pragma once

#include <string>
#include <unordered_map>
#include <vector>

namespace latconf {

// Reserved word for silence arcs. Silence is traversable like any other arc
// but is excluded from decoded word sequences and from WER.
inline constexpr const char* kSilenceWord = "<sil>";

struct Node {
  int id = 0;
  int time = 0;  // frames
};

struct Arc {
  int id = 0;
  int start_node = 0;
  int end_node = 0;
  std::string word;
  double acoustic_logp = 0.0;  // natural log of the acoustic likelihood
  double trans_logp = 0.0;     // natural log of the transition probability, <= 0
  std::string pronunciation;   // empty when absent

  bool is_silence() const { return word == kSilenceWord; }
};

// Timed DAG of word hypotheses. Immutable after construction; all operations
// over it are pure functions.
struct Lattice {
  std::string utterance_id;
  int frame_ms = 10;
  std::vector<Node> nodes;
  std::vector<Arc> arcs;
  int source_node_id = 0;
  int sink_node_id = 0;
};

// Positional indexes and adjacency for one lattice. Built on demand by
// algorithms; never serialized.
struct LatticeIndex {
  std::unordered_map<int, int> node_pos;  // node id -> position in nodes
  std::unordered_map<int, int> arc_pos;   // arc id -> position in arcs
  std::vector<std::vector<int>> in_arcs;  // node position -> arc positions
  std::vector<std::vector<int>> out_arcs;

  static LatticeIndex build(const Lattice& l);
};

// Throws ValidationError naming the violated invariant.
void validate_lattice(const Lattice& l);

// Parses the canonical lattice text format. The returned lattice is
// validated. Throws ParseError (with line number) or ValidationError.
Lattice parse_lattice(const std::string& text);

// Canonical serialization: nodes and arcs sorted by id, scores printed with
// six fractional digits. parse_lattice(serialize_lattice(l)) == l.
std::string serialize_lattice(const Lattice& l);

// Node ids in an order where every arc's start precedes its end. Ties are
// broken by (time, id) ascending, so the result is deterministic.
std::vector<int> topological_order(const Lattice& l);

bool operator==(const Node& a, const Node& b);
bool operator==(const Arc& a, const Arc& b);
bool operator==(const Lattice& a, const Lattice& b);

}  // namespace latconf
