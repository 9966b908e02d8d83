#include "latconf/lattice.hpp"

#include <map>
#include <set>

#include "doctest.h"
#include "fixtures.hpp"
#include "latconf/align.hpp"
#include "latconf/error.hpp"
#include "latconf/util.hpp"
#include "oracles.hpp"

using namespace latconf;
using namespace latconf::testing;

TEST_CASE("parse smallest well-formed lattice") {
  const std::string text =
      "UTT tiny FRAME_MS 10\n"
      "N 2 A 1\n"
      "I 0 t=0\n"
      "I 1 t=50\n"
      "J 0 S=0 E=1 W=hello a=-1.000000 l=0.000000\n";
  const Lattice l = parse_lattice(text);
  CHECK(l.utterance_id == "tiny");
  CHECK(l.frame_ms == 10);
  CHECK(l.nodes.size() == 2);
  CHECK(l.arcs.size() == 1);
  CHECK(l.arcs[0].word == "hello");
  CHECK(l.nodes[0].time == 0);
  CHECK(l.nodes[1].time == 50);
  CHECK(l.source_node_id == 0);
  CHECK(l.sink_node_id == 1);
}

TEST_CASE("fig1 fixture parses with the expected time points") {
  const Lattice l = load_fig1();
  std::set<int> times;
  for (const Node& n : l.nodes) times.insert(n.time);
  CHECK(times == std::set<int>{0, 12, 30, 68, 94});
  CHECK(l.arcs.size() == 12);
  std::set<std::string> words;
  for (const Arc& a : l.arcs) words.insert(a.word);
  CHECK(words == std::set<std::string>{"I", "it", "I'll", "aisle", "will",
                                       "sit", "seat", "simmer", "there",
                                       "here", "theater"});
}

TEST_CASE("zero-duration arc is rejected") {
  const std::string text =
      "UTT bad FRAME_MS 10\n"
      "N 2 A 1\n"
      "I 0 t=10\n"
      "I 1 t=10\n"
      "J 0 S=0 E=1 W=x a=-1.000000 l=0.000000\n";
  CHECK_THROWS_WITH_AS(parse_lattice(text),
                       doctest::Contains("non-positive arc duration"),
                       ValidationError);
}

TEST_CASE("dangling node reference is rejected") {
  const std::string text =
      "UTT bad FRAME_MS 10\n"
      "N 2 A 1\n"
      "I 0 t=0\n"
      "I 1 t=10\n"
      "J 0 S=0 E=7 W=x a=-1.000000 l=0.000000\n";
  CHECK_THROWS_WITH_AS(parse_lattice(text),
                       doctest::Contains("dangling node reference"),
                       ValidationError);
}

TEST_CASE("multiple sinks are rejected") {
  const std::string text =
      "UTT bad FRAME_MS 10\n"
      "N 3 A 1\n"
      "I 0 t=0\n"
      "I 1 t=10\n"
      "I 2 t=20\n"
      "J 0 S=0 E=1 W=x a=-1.000000 l=0.000000\n";
  CHECK_THROWS_AS(parse_lattice(text), ValidationError);
}

TEST_CASE("syntax errors carry line numbers") {
  const std::string text =
      "UTT bad FRAME_MS 10\n"
      "N 2 A 1\n"
      "I 0 t=0\n"
      "I 1 t=ten\n"
      "J 0 S=0 E=1 W=x a=-1.000000 l=0.000000\n";
  try {
    parse_lattice(text);
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line() == 4);
  }
}

TEST_CASE("positive transitional score is rejected") {
  const std::string text =
      "UTT bad FRAME_MS 10\n"
      "N 2 A 1\n"
      "I 0 t=0\n"
      "I 1 t=10\n"
      "J 0 S=0 E=1 W=x a=-1.000000 l=0.100000\n";
  CHECK_THROWS_AS(parse_lattice(text), ValidationError);
}

TEST_CASE("serialize round-trips and is deterministic") {
  const Lattice l = tiny_lattice();
  const std::string s1 = serialize_lattice(l);
  const std::string s2 = serialize_lattice(l);
  CHECK(s1 == s2);
  CHECK(parse_lattice(s1) == l);
}

TEST_CASE("fig1 is already canonical") {
  const std::string raw = util::read_text_file(fixture_path("fig1.lat"));
  const Lattice l = parse_lattice(raw);
  CHECK(serialize_lattice(l) == raw);
  // One canonicalization pass is a fixed point.
  const std::string once = serialize_lattice(parse_lattice(raw));
  CHECK(serialize_lattice(parse_lattice(once)) == once);
}

TEST_CASE("parse-serialize identity on random lattices") {
  for (uint64_t seed = 1; seed <= 1000; ++seed) {
    // One canonicalization pass quantizes scores to six decimals; after that
    // parse and serialize invert each other exactly.
    const Lattice l = parse_lattice(serialize_lattice(random_lattice(seed, 14)));
    const std::string text = serialize_lattice(l);
    REQUIRE(parse_lattice(text) == l);
    REQUIRE(serialize_lattice(parse_lattice(text)) == text);
  }
}

TEST_CASE("topological order of a chain and a diamond") {
  const std::string chain =
      "UTT c FRAME_MS 10\n"
      "N 3 A 2\n"
      "I 0 t=0\nI 1 t=10\nI 2 t=20\n"
      "J 0 S=0 E=1 W=a a=-1.000000 l=0.000000\n"
      "J 1 S=1 E=2 W=b a=-1.000000 l=0.000000\n";
  CHECK(topological_order(parse_lattice(chain)) == std::vector<int>{0, 1, 2});

  // Diamond with time(a) < time(b): tie-break puts a before b.
  const std::string diamond =
      "UTT d FRAME_MS 10\n"
      "N 4 A 4\n"
      "I 0 t=0\nI 1 t=10\nI 2 t=15\nI 3 t=30\n"
      "J 0 S=0 E=1 W=a a=-1.000000 l=-0.693147\n"
      "J 1 S=0 E=2 W=b a=-1.000000 l=-0.693147\n"
      "J 2 S=1 E=3 W=c a=-1.000000 l=0.000000\n"
      "J 3 S=2 E=3 W=d a=-1.000000 l=0.000000\n";
  CHECK(topological_order(parse_lattice(diamond)) ==
        std::vector<int>{0, 1, 2, 3});
}

TEST_CASE("fig1 topological order groups by time") {
  const Lattice l = load_fig1();
  const auto order = topological_order(l);
  CHECK(order == std::vector<int>{0, 1, 2, 3, 4, 5, 6});
}

TEST_CASE("topological order is a permutation consistent with every arc") {
  for (uint64_t seed = 1; seed <= 200; ++seed) {
    const Lattice l = random_lattice(seed, 20);
    const auto order = topological_order(l);
    REQUIRE(order.size() == l.nodes.size());
    std::map<int, int> rank;
    for (size_t i = 0; i < order.size(); ++i) rank[order[i]] = (int)i;
    REQUIRE(rank.size() == l.nodes.size());
    for (const Arc& a : l.arcs) {
      REQUIRE(rank.at(a.start_node) < rank.at(a.end_node));
    }
  }
}

TEST_CASE("align basics") {
  const Alignment a = align({"I", "will"}, {"I", "will"});
  CHECK(a.distance() == 0);
  CHECK(a.ops.size() == 2);
  CHECK(a.ops[0].kind == AlignKind::kMatch);

  const Alignment b =
      align({"I", "will", "sit", "there"}, {"I", "will", "sit", "here"});
  CHECK(b.distance() == 1);
  CHECK(b.matches() == 3);
  CHECK(b.substitutions() == 1);
  CHECK(b.ops[3].kind == AlignKind::kSubstitute);
  CHECK(*b.ops[3].hyp_index == 3);
  CHECK(*b.ops[3].ref_index == 3);

  const Alignment c = align({}, {"hi"});
  CHECK(c.distance() == 1);
  CHECK(c.ops.size() == 1);
  CHECK(c.ops[0].kind == AlignKind::kInsert);
}

TEST_CASE("align distance is symmetric") {
  util::Rng rng(404);
  const std::vector<std::string> vocab = {"x", "y", "z", "w"};
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<std::string> a, b;
    const int na = rng.uniform_int(0, 7);
    const int nb = rng.uniform_int(0, 7);
    for (int i = 0; i < na; ++i) a.push_back(vocab[rng.uniform_int(0, 3)]);
    for (int i = 0; i < nb; ++i) b.push_back(vocab[rng.uniform_int(0, 3)]);
    REQUIRE(align(a, b).distance() == align(b, a).distance());
  }
}

TEST_CASE("align matches the recursive oracle on all short word lists") {
  // Every pair of word lists of length <= 6 over a 3-word vocabulary.
  const std::vector<std::string> vocab = {"a", "b", "c"};
  std::vector<std::vector<std::string>> lists;
  auto gen = [&](auto&& self, std::vector<std::string>& cur, int max_len) -> void {
    lists.push_back(cur);
    if ((int)cur.size() == max_len) return;
    for (const auto& w : vocab) {
      cur.push_back(w);
      self(self, cur, max_len);
      cur.pop_back();
    }
  };
  std::vector<std::string> cur;
  gen(gen, cur, 6);
  REQUIRE(lists.size() == 1093);
  size_t mismatches = 0;
  for (const auto& a : lists) {
    for (const auto& b : lists) {
      if (align(a, b).distance() != edit_distance_oracle(a, b)) ++mismatches;
    }
  }
  CHECK(mismatches == 0);
}

TEST_CASE("alignment ops replay hypothesis into reference") {
  util::Rng rng(11);
  const std::vector<std::string> vocab = {"p", "q", "r"};
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<std::string> hyp, ref;
    const int nh = rng.uniform_int(0, 6);
    const int nr = rng.uniform_int(0, 6);
    for (int i = 0; i < nh; ++i) hyp.push_back(vocab[rng.uniform_int(0, 2)]);
    for (int i = 0; i < nr; ++i) ref.push_back(vocab[rng.uniform_int(0, 2)]);
    const Alignment al = align(hyp, ref);

    std::vector<std::string> rebuilt;
    int last_hyp = -1;
    int last_ref = -1;
    for (const AlignOp& op : al.ops) {
      if (op.hyp_index) {
        REQUIRE(*op.hyp_index == last_hyp + 1);
        last_hyp = *op.hyp_index;
      }
      if (op.ref_index) {
        REQUIRE(*op.ref_index == last_ref + 1);
        last_ref = *op.ref_index;
      }
      switch (op.kind) {
        case AlignKind::kMatch:
          REQUIRE(hyp[*op.hyp_index] == ref[*op.ref_index]);
          rebuilt.push_back(hyp[*op.hyp_index]);
          break;
        case AlignKind::kSubstitute:
          REQUIRE(hyp[*op.hyp_index] != ref[*op.ref_index]);
          rebuilt.push_back(ref[*op.ref_index]);
          break;
        case AlignKind::kDelete:
          break;  // hypothesis word dropped
        case AlignKind::kInsert:
          rebuilt.push_back(ref[*op.ref_index]);
          break;
      }
    }
    REQUIRE(last_hyp == nh - 1);
    REQUIRE(last_ref == nr - 1);
    REQUIRE(rebuilt == ref);
  }
}
