#pragma once

#include <map>
#include <string>
#include <vector>

#include "latconf/hwcn.hpp"

namespace latconf {

struct WerReport {
  long long substitutions = 0;
  long long deletions = 0;  // reference words missing from the hypothesis
  long long insertions = 0; // hypothesis words absent from the reference
  long long ref_word_count = 0;
  double wer = 0.0;  // (S + D + I) / ref_word_count

  long long errors() const { return substitutions + deletions + insertions; }
};

struct DetectionReport {
  double eer = 0.0;
  double eer_threshold = 0.0;
  double nce = 0.0;
  struct Point {
    double threshold;
    double p_miss;        // P(score < t | correct)
    double p_false_alarm; // P(score >= t | wrong)
  };
  std::vector<Point> det_points;
};

using ScoredLabel = std::pair<double, int>;  // (score, 0/1 label)
using WordsById = std::map<std::string, std::vector<std::string>>;

// Corpus WER: per-utterance minimum-edit alignments, with substitution,
// deletion, and insertion counts pooled over utterances. Hypothesis and
// reference maps must carry the same utterance ids.
WerReport wer(const WordsById& hyps, const WordsById& refs);

// Equal error rate: sweeps every distinct score as a threshold (predict
// correct when score >= t) and interpolates linearly where the miss and
// false-alarm curves cross between thresholds. Ties resolve to the lower
// threshold. Requires both classes.
std::pair<double, double> eer(const std::vector<ScoredLabel>& scores);

// Normalized cross entropy, base-2, scores clamped to [1e-9, 1 - 1e-9].
double nce(const std::vector<ScoredLabel>& scores);

// Empirical miss/false-alarm curve at n_points score quantiles, plus the
// EER and NCE of the same sample.
DetectionReport det_curve(const std::vector<ScoredLabel>& scores,
                          int n_points = 100);

// Which arcs contribute (score, label) pairs for detection metrics.
enum class ArcSet {
  kAll,        // every labeled arc
  kCompeting,  // only arcs competing with some 1-best arc
};

// (confidence, label) pairs of a labeled, scored network.
std::vector<ScoredLabel> collect_arc_scores(const Hwcn& h,
                                            ArcSet set = ArcSet::kAll);

// Ten-bin expected calibration error of the scores.
double expected_calibration_error(const std::vector<ScoredLabel>& scores,
                                  int bins = 10);

// Reference transcript TSV: "<utterance_id>\t<space-separated words>".
WordsById parse_refs(const std::string& text);
std::string serialize_refs(const WordsById& refs);

std::string format_wer_report(const WerReport& r, bool tsv = false);

}  // namespace latconf
