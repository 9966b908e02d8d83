#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "latconf/lattice.hpp"
#include "latconf/metrics.hpp"

namespace latconf {

// Error behavior of one synthetic recognizer.
struct RecognizerProfile {
  double substitution_rate = 0.10;
  double deletion_rate = 0.02;
  double insertion_rate = 0.02;
  int confusion_pool_size = 4;   // words competing in a slot
  int time_jitter_frames = 3;    // jitter of intermediate split nodes
  double acoustic_separation = 1.0;  // how informative acoustics are
  double lm_noise = 0.3;             // spread of alternative LM shares
};

struct SimConfig {
  uint64_t seed = 1;
  int vocabulary_size = 200;
  int utterance_count = 100;
  int words_min = 3;
  int words_max = 10;
  std::vector<RecognizerProfile> recognizers;
};

struct GeneratedCorpus {
  WordsById refs;
  // One lattice set per recognizer, keyed by utterance id.
  std::vector<std::map<std::string, Lattice>> lattices;
  // Probability that the recognizer's 1-best output exactly matches the
  // reference, from the generating distributions.
  std::vector<std::map<std::string, double>> oracle_correct_prob;
};

// Seeded synthetic corpus. Every lattice validates; the MAP 1-best of each
// lattice equals the recognizer's (error-corrupted) transcription by
// construction, for any positive acoustic scale, so the oracle probabilities
// are exact. Substituted and deleted reference words stay reachable as
// competing arcs, which is what gives confidence-driven decoding room to
// beat the MAP baseline.
GeneratedCorpus generate_corpus(const SimConfig& cfg);

enum class Split { kTrain, kDev, kEval };

// Deterministic 60/20/20 split by utterance id hash.
Split split_of(const std::string& utterance_id);
const char* split_name(Split s);

// Flat key=value config file, one pair per line. Recognizer fields use the
// prefix "recognizer.<index>.".
SimConfig parse_sim_config(const std::string& text);
std::string serialize_sim_config(const SimConfig& cfg);

}  // namespace latconf
