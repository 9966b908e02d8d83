#include "latconf/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "latconf/align.hpp"
#include "latconf/error.hpp"
#include "latconf/util.hpp"

namespace latconf {

WerReport wer(const WordsById& hyps, const WordsById& refs) {
  if (hyps.size() != refs.size()) {
    throw ContractError("hypothesis and reference utterance sets differ");
  }
  WerReport r;
  for (const auto& [utt, ref_words] : refs) {
    const auto it = hyps.find(utt);
    if (it == hyps.end()) {
      throw ContractError("missing hypothesis for utterance " + utt);
    }
    const Alignment al = align(it->second, ref_words);
    r.substitutions += al.substitutions();
    // align() edits the hypothesis into the reference, so its insert ops are
    // reference words the recognizer missed (deletions in scoring terms) and
    // its delete ops are spurious hypothesis words (insertions).
    r.deletions += al.insertions();
    r.insertions += al.deletions();
    r.ref_word_count += static_cast<long long>(ref_words.size());
  }
  if (r.ref_word_count > 0) {
    r.wer = static_cast<double>(r.errors()) /
            static_cast<double>(r.ref_word_count);
  } else {
    r.wer = r.errors() == 0 ? 0.0 : std::numeric_limits<double>::infinity();
  }
  return r;
}

namespace {

struct SweepPoint {
  double threshold;
  double p_miss;
  double p_fa;
};

// Miss/false-alarm values at every distinct score, plus a sentinel above the
// maximum where everything is rejected.
std::vector<SweepPoint> threshold_sweep(const std::vector<ScoredLabel>& scores,
                                        long long* n_pos_out,
                                        long long* n_neg_out) {
  long long n_pos = 0;
  long long n_neg = 0;
  std::vector<std::pair<double, int>> sorted(scores.begin(), scores.end());
  std::sort(sorted.begin(), sorted.end());
  for (const auto& [s, l] : sorted) {
    if (l == 1) {
      ++n_pos;
    } else if (l == 0) {
      ++n_neg;
    } else {
      throw ContractError("label must be 0 or 1");
    }
  }
  if (n_pos == 0 || n_neg == 0) {
    throw ContractError("detection metrics require both classes");
  }
  if (n_pos_out) *n_pos_out = n_pos;
  if (n_neg_out) *n_neg_out = n_neg;

  std::vector<SweepPoint> points;
  long long pos_below = 0;  // positives with score < t
  long long neg_below = 0;
  size_t i = 0;
  while (i < sorted.size()) {
    const double t = sorted[i].first;
    points.push_back({t, static_cast<double>(pos_below) / n_pos,
                      static_cast<double>(n_neg - neg_below) / n_neg});
    while (i < sorted.size() && sorted[i].first == t) {
      if (sorted[i].second == 1) {
        ++pos_below;
      } else {
        ++neg_below;
      }
      ++i;
    }
  }
  points.push_back({sorted.back().first + 1.0, 1.0, 0.0});
  return points;
}

}  // namespace

std::pair<double, double> eer(const std::vector<ScoredLabel>& scores) {
  const auto points = threshold_sweep(scores, nullptr, nullptr);

  // diff = P_M - P_FA is non-decreasing in the threshold. Take the exact
  // zero at the lowest threshold if one exists, otherwise interpolate inside
  // the interval where the sign flips.
  for (const SweepPoint& p : points) {
    if (p.p_miss == p.p_fa) return {p.p_miss, p.threshold};
  }
  for (size_t i = 0; i + 1 < points.size(); ++i) {
    const double d0 = points[i].p_miss - points[i].p_fa;
    const double d1 = points[i + 1].p_miss - points[i + 1].p_fa;
    if (d0 < 0.0 && d1 > 0.0) {
      const double alpha = -d0 / (d1 - d0);
      const double value =
          points[i].p_miss + alpha * (points[i + 1].p_miss - points[i].p_miss);
      const double threshold =
          points[i].threshold +
          alpha * (points[i + 1].threshold - points[i].threshold);
      return {value, threshold};
    }
  }
  // diff runs from -1 at the minimum score to +1 at the sentinel and is
  // monotone, so one of the branches above always fires.
  throw NumericError("EER sweep found no crossing");
}

double nce(const std::vector<ScoredLabel>& scores) {
  long long n_pos = 0;
  long long n_neg = 0;
  for (const auto& [s, l] : scores) {
    if (l == 1) {
      ++n_pos;
    } else if (l == 0) {
      ++n_neg;
    } else {
      throw ContractError("label must be 0 or 1");
    }
  }
  if (n_pos == 0 || n_neg == 0) {
    throw ContractError("NCE requires both classes");
  }
  const double n = static_cast<double>(n_pos + n_neg);
  const double p_c = static_cast<double>(n_pos) / n;
  const double h_prior =
      -(n_pos * std::log2(p_c) + n_neg * std::log2(1.0 - p_c)) / n;
  double h_conf = 0.0;
  for (const auto& [s, l] : scores) {
    const double y = std::clamp(s, 1e-9, 1.0 - 1e-9);
    h_conf -= l == 1 ? std::log2(y) : std::log2(1.0 - y);
  }
  h_conf /= n;
  return (h_prior - h_conf) / h_prior;
}

DetectionReport det_curve(const std::vector<ScoredLabel>& scores,
                          int n_points) {
  if (n_points < 2) throw ContractError("n_points must be at least 2");
  DetectionReport report;
  const auto [eer_value, eer_threshold] = eer(scores);
  report.eer = eer_value;
  report.eer_threshold = eer_threshold;
  report.nce = nce(scores);

  std::vector<double> sorted_scores;
  sorted_scores.reserve(scores.size());
  for (const auto& [s, l] : scores) sorted_scores.push_back(s);
  std::sort(sorted_scores.begin(), sorted_scores.end());

  long long n_pos = 0;
  long long n_neg = 0;
  std::vector<std::pair<double, int>> sorted(scores.begin(), scores.end());
  std::sort(sorted.begin(), sorted.end());
  for (const auto& [s, l] : sorted) (l == 1 ? n_pos : n_neg) += 1;

  for (int k = 0; k < n_points; ++k) {
    const double q = static_cast<double>(k) / (n_points - 1);
    const size_t pos = std::min(
        sorted_scores.size() - 1,
        static_cast<size_t>(q * static_cast<double>(sorted_scores.size() - 1) +
                            0.5));
    const double t = sorted_scores[pos];
    long long pos_below = 0;
    long long neg_at_or_above = 0;
    for (const auto& [s, l] : sorted) {
      if (l == 1 && s < t) ++pos_below;
      if (l == 0 && s >= t) ++neg_at_or_above;
    }
    report.det_points.push_back({t, static_cast<double>(pos_below) / n_pos,
                                 static_cast<double>(neg_at_or_above) / n_neg});
  }
  return report;
}

std::vector<ScoredLabel> collect_arc_scores(const Hwcn& h, ArcSet set) {
  std::vector<ScoredLabel> out;
  std::set<std::pair<int, int>> competing_slots;
  if (set == ArcSet::kCompeting) {
    if (h.onebest_arc_ids.empty()) {
      throw ContractError("competing arc set requires onebest_arc_ids");
    }
    const HwcnIndex idx = HwcnIndex::build(h);
    for (int arc_id : h.onebest_arc_ids) {
      const HwcnArc& a = h.arcs[idx.arc_pos.at(arc_id)];
      competing_slots.insert({a.start_node, a.end_node});
    }
  }
  for (const HwcnArc& a : h.arcs) {
    if (!a.label || !a.confidence) {
      throw ContractError("arc " + std::to_string(a.id) +
                          " lacks a label or confidence");
    }
    if (set == ArcSet::kCompeting &&
        !competing_slots.count({a.start_node, a.end_node})) {
      continue;
    }
    out.push_back({*a.confidence, *a.label});
  }
  return out;
}

double expected_calibration_error(const std::vector<ScoredLabel>& scores,
                                  int bins) {
  if (bins < 1) throw ContractError("bins must be positive");
  if (scores.empty()) throw ContractError("no scores");
  std::vector<double> sum_score(bins, 0.0);
  std::vector<double> sum_label(bins, 0.0);
  std::vector<long long> count(bins, 0);
  for (const auto& [s, l] : scores) {
    int b = static_cast<int>(s * bins);
    b = std::clamp(b, 0, bins - 1);
    sum_score[b] += s;
    sum_label[b] += l;
    ++count[b];
  }
  double ece = 0.0;
  for (int b = 0; b < bins; ++b) {
    if (count[b] == 0) continue;
    const double conf = sum_score[b] / count[b];
    const double acc = sum_label[b] / count[b];
    ece += std::abs(conf - acc) * count[b] / static_cast<double>(scores.size());
  }
  return ece;
}

WordsById parse_refs(const std::string& text) {
  WordsById refs;
  int line_no = 0;
  for (const std::string& line : util::split(text, '\n')) {
    ++line_no;
    if (line.empty()) continue;
    const auto cols = util::split(line, '\t');
    if (cols.size() != 2) {
      throw ParseError("expected '<utterance_id>\\t<words>'", line_no);
    }
    refs[cols[0]] = util::split_whitespace(cols[1]);
  }
  return refs;
}

std::string serialize_refs(const WordsById& refs) {
  std::string out;
  for (const auto& [utt, words] : refs) {
    out += utt + "\t" + util::join(words, " ") + "\n";
  }
  return out;
}

std::string format_wer_report(const WerReport& r, bool tsv) {
  char buf[160];
  if (tsv) {
    std::snprintf(buf, sizeof(buf), "wer\t%.6f\tS\t%lld\tD\t%lld\tI\t%lld\tN\t%lld\n",
                  r.wer, r.substitutions, r.deletions, r.insertions,
                  r.ref_word_count);
  } else {
    std::snprintf(buf, sizeof(buf),
                  "WER %.2f%%  (S=%lld D=%lld I=%lld N=%lld)\n", 100.0 * r.wer,
                  r.substitutions, r.deletions, r.insertions,
                  r.ref_word_count);
  }
  return buf;
}

}  // namespace latconf
