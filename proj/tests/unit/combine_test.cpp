#include "latconf/combine.hpp"

#include "doctest.h"
#include "latconf/error.hpp"
#include "latconf/simgen.hpp"
#include "latconf/util.hpp"

using namespace latconf;

namespace {

DecodedUtterance result(const std::string& utt,
                        const std::vector<std::string>& words, double mean) {
  DecodedUtterance r;
  r.utterance_id = utt;
  r.words = words;
  r.mean_confidence = mean;
  return r;
}

}  // namespace

TEST_CASE("combine_utterance picks the highest mean, ties to lowest index") {
  const DecodedUtterance a = result("u", {"same"}, 0.91);
  const DecodedUtterance b = result("u", {"same"}, 0.88);
  CHECK(&combine_utterance({&a, &b}) == &a);
  CHECK(&combine_utterance({&b, &a}) == &a);

  const DecodedUtterance c = result("u", {"other"}, 0.91);
  CHECK(&combine_utterance({&a, &c}) == &a);  // tie: first one listed wins

  CHECK_THROWS_AS(combine_utterance({}), ContractError);
}

TEST_CASE("nine systems yield exactly 502 subsets") {
  WordsById refs = {{"u1", {"a", "b"}}, {"u2", {"c"}}};
  std::vector<DecodedCorpus> systems(9);
  for (int s = 0; s < 9; ++s) {
    systems[s]["u1"] = result("u1", {"a", "b"}, 0.5 + 0.01 * s);
    systems[s]["u2"] = result("u2", {"c"}, 0.5);
  }
  const CombinationReport report =
      run_combination_experiment(systems, refs, CombineMode::kRaw);
  CHECK(report.records.size() == 502);
  CHECK(report.n_better + report.n_worse + report.n_equal == 502);
}

TEST_CASE("identical systems tally as equal") {
  WordsById refs = {{"u1", {"a", "b"}}, {"u2", {"c", "d"}}};
  std::vector<DecodedCorpus> systems(2);
  for (int s = 0; s < 2; ++s) {
    systems[s]["u1"] = result("u1", {"a", "x"}, 0.7);
    systems[s]["u2"] = result("u2", {"c", "d"}, 0.8);
  }
  const CombinationReport report =
      run_combination_experiment(systems, refs, CombineMode::kRaw);
  REQUIRE(report.records.size() == 1);
  CHECK(report.n_equal == 1);
  CHECK(report.n_better == 0);
  CHECK(report.n_worse == 0);
  CHECK(*report.records[0].combined_wer_raw ==
        doctest::Approx(report.records[0].best_individual_wer));
}

TEST_CASE("complementary systems combine to a strict win") {
  // System 0 is right on u1 and confident; system 1 is right on u2 and
  // confident; each is wrong (and unconfident) on the other utterance.
  WordsById refs = {{"u1", {"a"}}, {"u2", {"b"}}};
  std::vector<DecodedCorpus> systems(2);
  systems[0]["u1"] = result("u1", {"a"}, 0.95);
  systems[0]["u2"] = result("u2", {"x"}, 0.40);
  systems[1]["u1"] = result("u1", {"y"}, 0.35);
  systems[1]["u2"] = result("u2", {"b"}, 0.90);
  const CombinationReport report =
      run_combination_experiment(systems, refs, CombineMode::kCalibrated);
  REQUIRE(report.records.size() == 1);
  CHECK(report.n_better == 1);
  CHECK(*report.records[0].combined_wer_calibrated == doctest::Approx(0.0));
  CHECK(report.records[0].best_individual_wer == doctest::Approx(0.5));
}

TEST_CASE("combination experiment is deterministic") {
  WordsById refs;
  std::vector<DecodedCorpus> systems(4);
  util::Rng rng(88);
  for (int u = 0; u < 30; ++u) {
    const std::string utt = "u" + std::to_string(u);
    refs[utt] = {"w" + std::to_string(rng.uniform_int(0, 5))};
    for (int s = 0; s < 4; ++s) {
      const bool right = rng.uniform() < 0.6;
      systems[s][utt] = result(
          utt, {right ? refs[utt][0] : "wrong"}, rng.uniform(0.2, 0.95));
    }
  }
  const CombinationReport r1 =
      run_combination_experiment(systems, refs, CombineMode::kRaw);
  const CombinationReport r2 =
      run_combination_experiment(systems, refs, CombineMode::kRaw);
  CHECK(format_combination_report(r1, true) ==
        format_combination_report(r2, true));
}

TEST_CASE("oracle confidences make combination at least as accurate") {
  // Per-utterance correctness probabilities from the generator, used as the
  // mean confidence of a synthetic "result": the combined pick must be at
  // least as accurate as every individual system, up to sampling noise.
  SimConfig cfg;
  cfg.seed = 424242;
  cfg.utterance_count = 2500;
  cfg.vocabulary_size = 60;
  cfg.words_min = 2;
  cfg.words_max = 5;
  for (int r = 0; r < 3; ++r) {
    RecognizerProfile p;
    p.substitution_rate = 0.10 + 0.05 * r;
    p.deletion_rate = 0.02;
    p.insertion_rate = 0.02;
    p.confusion_pool_size = 3;
    p.time_jitter_frames = 0;
    cfg.recognizers.push_back(p);
  }
  const GeneratedCorpus corpus = generate_corpus(cfg);

  // Simulate each recognizer's correctness with its oracle probability and
  // combine by highest oracle confidence.
  util::Rng rng(31415);
  const int n = static_cast<int>(cfg.recognizers.size());
  std::vector<long long> individual_correct(n, 0);
  long long combined_correct = 0;
  long long total = 0;
  for (const auto& [utt, ref] : corpus.refs) {
    ++total;
    int best = 0;
    std::vector<bool> correct(n);
    for (int r = 0; r < n; ++r) {
      const double p = corpus.oracle_correct_prob[r].at(utt);
      correct[r] = rng.uniform() < p;
      if (correct[r]) ++individual_correct[r];
      if (corpus.oracle_correct_prob[r].at(utt) >
          corpus.oracle_correct_prob[best].at(utt)) {
        best = r;
      }
    }
    if (correct[best]) ++combined_correct;
  }
  const double combined_acc = static_cast<double>(combined_correct) / total;
  for (int r = 0; r < n; ++r) {
    const double acc = static_cast<double>(individual_correct[r]) / total;
    REQUIRE(combined_acc >= acc - 0.005);
  }
}
