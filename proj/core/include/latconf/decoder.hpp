#pragma once

#include <optional>
#include <string>
#include <vector>

#include "latconf/hwcn.hpp"

namespace latconf {

struct DecodeResult {
  std::vector<std::string> words;  // silence stripped
  std::vector<int> arc_ids;        // full path, silence included
  std::optional<double> mean_confidence;
  std::optional<double> estimated_wer;  // 1 - mean_confidence
  int n_slots = 0;                      // == words.size()
};

// The source-to-sink path maximizing the arithmetic mean of arc confidences
// over non-silence arcs. Means are not additive, so this is an exact dynamic
// program over (node, word-count) states rather than a shortest-path search.
// Silence arcs are traversable but excluded from both the numerator and the
// count. Ties: fewer arcs, then lexicographically smallest word sequence.
// Throws ContractError if any arc lacks a confidence.
DecodeResult decode_max_mean(const Hwcn& h);

// MAP baseline: max-sum Viterbi over
// acoustic_scale * merged_acoustic_logp + merged_trans_logp, same
// tie-breaking as decode_max_mean. mean_confidence is filled only when every
// arc on the returned path carries a confidence.
DecodeResult map_onebest(const Hwcn& h, double acoustic_scale);

// One output line per utterance: "<utterance_id>\t<words>\t<mean:%.6f>".
// A result without a mean confidence prints 0.000000.
std::string format_decode_line(const std::string& utterance_id,
                               const DecodeResult& r);

struct DecodedUtterance {
  std::string utterance_id;
  std::vector<std::string> words;
  double mean_confidence = 0.0;
};

// Parses a decode output file (one line per utterance).
std::vector<DecodedUtterance> parse_decode_file(const std::string& text);

}  // namespace latconf
