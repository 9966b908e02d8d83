#pragma once

#include <string>

#include "latconf/lattice.hpp"
#include "latconf/util.hpp"

namespace latconf::testing {

inline std::string fixture_path(const std::string& name) {
  return std::string(LATCONF_FIXTURE_DIR) + "/" + name;
}

inline Lattice load_fig1() {
  return parse_lattice(util::read_text_file(fixture_path("fig1.lat")));
}

// Smallest well-formed lattice: one arc "hello" over frames 0..50.
inline Lattice tiny_lattice() {
  Lattice l;
  l.utterance_id = "tiny";
  l.frame_ms = 10;
  l.nodes = {{0, 0}, {1, 50}};
  Arc a;
  a.id = 0;
  a.start_node = 0;
  a.end_node = 1;
  a.word = "hello";
  a.acoustic_logp = -1.0;
  a.trans_logp = 0.0;
  l.arcs = {a};
  l.source_node_id = 0;
  l.sink_node_id = 1;
  return l;
}

}  // namespace latconf::testing
