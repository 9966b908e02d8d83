#include "latconf/combine.hpp"

#include <algorithm>
#include <cstdio>

#include "latconf/error.hpp"
#include "latconf/util.hpp"

namespace latconf {

const DecodedUtterance& combine_utterance(
    const std::vector<const DecodedUtterance*>& results) {
  if (results.empty()) throw ContractError("no results to combine");
  const DecodedUtterance* best = results[0];
  for (const DecodedUtterance* r : results) {
    if (r->mean_confidence > best->mean_confidence) best = r;
  }
  return *best;
}

CombinationReport run_combination_experiment(
    const std::vector<DecodedCorpus>& systems, const WordsById& refs,
    CombineMode mode) {
  if (systems.size() < 2) {
    throw ContractError("combination requires at least 2 systems");
  }
  if (systems.size() > 16) {
    throw ContractError("subset enumeration capped at 16 systems");
  }
  for (const DecodedCorpus& c : systems) {
    if (c.size() != refs.size()) {
      throw ContractError("utterance id sets differ across systems");
    }
    for (const auto& [utt, r] : c) {
      if (!refs.count(utt)) {
        throw ContractError("utterance " + utt + " missing from references");
      }
    }
  }

  const int n = static_cast<int>(systems.size());
  long long total_ref_words = 0;
  for (const auto& [utt, words] : refs) {
    total_ref_words += static_cast<long long>(words.size());
  }

  // Per-system error counts, computed once.
  std::vector<long long> individual_errors(n, 0);
  for (int s = 0; s < n; ++s) {
    WordsById hyps;
    for (const auto& [utt, r] : systems[s]) hyps[utt] = r.words;
    individual_errors[s] = wer(hyps, refs).errors();
  }

  CombinationReport report;
  report.mode = mode;
  for (unsigned mask = 1; mask < (1u << n); ++mask) {
    std::vector<int> subset;
    for (int s = 0; s < n; ++s) {
      if (mask & (1u << s)) subset.push_back(s);
    }
    if (subset.size() < 2) continue;

    CombinationReport::Record rec;
    rec.subset = subset;
    rec.best_individual_system = subset[0];
    for (int s : subset) {
      if (individual_errors[s] <
          individual_errors[rec.best_individual_system]) {
        rec.best_individual_system = s;
      }
    }
    rec.best_individual_wer =
        total_ref_words > 0
            ? static_cast<double>(individual_errors[rec.best_individual_system]) /
                  static_cast<double>(total_ref_words)
            : 0.0;

    WordsById combined;
    for (const auto& [utt, ref_words] : refs) {
      std::vector<const DecodedUtterance*> candidates;
      candidates.reserve(subset.size());
      for (int s : subset) candidates.push_back(&systems[s].at(utt));
      combined[utt] = combine_utterance(candidates).words;
    }
    const long long combined_errors = wer(combined, refs).errors();
    const double combined_wer =
        total_ref_words > 0 ? static_cast<double>(combined_errors) /
                                  static_cast<double>(total_ref_words)
                            : 0.0;
    if (mode == CombineMode::kRaw) {
      rec.combined_wer_raw = combined_wer;
    } else {
      rec.combined_wer_calibrated = combined_wer;
    }

    const long long best_errors = individual_errors[rec.best_individual_system];
    if (combined_errors < best_errors) {
      ++report.n_better;
    } else if (combined_errors > best_errors) {
      ++report.n_worse;
    } else {
      ++report.n_equal;
    }
    report.records.push_back(std::move(rec));
  }
  return report;
}

std::string format_combination_report(const CombinationReport& r, bool tsv) {
  const char* mode_name = r.mode == CombineMode::kRaw ? "raw" : "calibrated";
  std::string out;
  char buf[256];
  if (tsv) {
    for (const auto& rec : r.records) {
      std::string subset;
      for (size_t i = 0; i < rec.subset.size(); ++i) {
        if (i) subset += ",";
        subset += std::to_string(rec.subset[i]);
      }
      const double cw = r.mode == CombineMode::kRaw
                            ? rec.combined_wer_raw.value_or(0.0)
                            : rec.combined_wer_calibrated.value_or(0.0);
      std::snprintf(buf, sizeof(buf), "%s\t%d\t%.6f\t%.6f\n", subset.c_str(),
                    rec.best_individual_system, rec.best_individual_wer, cw);
      out += buf;
    }
    std::snprintf(buf, sizeof(buf), "tally\t%s\tbetter\t%d\tworse\t%d\tequal\t%d\n",
                  mode_name, r.n_better, r.n_worse, r.n_equal);
    out += buf;
  } else {
    std::snprintf(buf, sizeof(buf),
                  "combination (%s scores), %zu subsets\n", mode_name,
                  r.records.size());
    out += buf;
    std::snprintf(buf, sizeof(buf), "  better than best individual: %d\n",
                  r.n_better);
    out += buf;
    std::snprintf(buf, sizeof(buf), "  worse than best individual:  %d\n",
                  r.n_worse);
    out += buf;
    std::snprintf(buf, sizeof(buf), "  equal to best individual:    %d\n",
                  r.n_equal);
    out += buf;
  }
  return out;
}

}  // namespace latconf
