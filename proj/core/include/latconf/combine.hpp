#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "latconf/decoder.hpp"
#include "latconf/metrics.hpp"

namespace latconf {

enum class CombineMode { kRaw, kCalibrated };

// One decoded corpus per recognizer: utterance id -> decoded result.
using DecodedCorpus = std::map<std::string, DecodedUtterance>;

struct CombinationReport {
  struct Record {
    std::vector<int> subset;  // recognizer indices, ascending
    double best_individual_wer = 0.0;
    int best_individual_system = 0;
    std::optional<double> combined_wer_raw;
    std::optional<double> combined_wer_calibrated;
  };
  CombineMode mode = CombineMode::kRaw;
  std::vector<Record> records;
  int n_better = 0;
  int n_worse = 0;
  int n_equal = 0;
};

// The result with the highest mean confidence; ties go to the lowest
// recognizer index. Throws ContractError on empty input.
const DecodedUtterance& combine_utterance(
    const std::vector<const DecodedUtterance*>& results);

// Evaluates every recognizer subset of size >= 2: the combined hypothesis
// picks, per utterance, the member result with the highest mean confidence;
// its WER is compared against the best individual WER in the subset.
// Better/worse/equal comparisons are exact (same reference denominator, so
// error counts are compared as integers). All corpora must share the
// reference utterance id set.
CombinationReport run_combination_experiment(
    const std::vector<DecodedCorpus>& systems, const WordsById& refs,
    CombineMode mode);

std::string format_combination_report(const CombinationReport& r,
                                      bool tsv = false);

}  // namespace latconf
