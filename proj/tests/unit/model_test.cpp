#include "latconf/model.hpp"

#include <cmath>

#include "doctest.h"
#include "fixtures.hpp"
#include "latconf/error.hpp"
#include "latconf/posterior.hpp"
#include "latconf/util.hpp"
#include "oracles.hpp"

using namespace latconf;
using namespace latconf::testing;

namespace {

Hwcn labeled_fig1() {
  const PosteriorLattice p = forward_backward(load_fig1(), 1.0);
  const Hwcn h = build_hwcn(p, 0);
  return label_arcs(h, {"I", "will", "sit", "here"});
}

// Tiny linearly separable corpus: positives carry high posterior, negatives
// low, so a logistic model can drive the loss toward zero.
std::vector<Hwcn> separable_corpus(int utterances) {
  std::vector<Hwcn> corpus;
  util::Rng rng(31337);
  for (int u = 0; u < utterances; ++u) {
    Hwcn h;
    h.utterance_id = "sep_" + std::to_string(u);
    h.nodes = {{0, 0}, {1, 10}, {2, 20}};
    auto arc = [&](int id, int s, int e, const std::string& w, double post,
                   int label) {
      HwcnArc a;
      a.id = id;
      a.start_node = s;
      a.end_node = e;
      a.word = w;
      a.merged_log_posterior = std::log(post);
      a.merged_acoustic_logp = -1.0 + 0.01 * id;
      a.merged_trans_logp = std::log(post);
      a.source_arc_ids = {id};
      a.label = label;
      h.arcs.push_back(a);
    };
    arc(0, 0, 1, "yes", rng.uniform(0.85, 0.95), 1);
    arc(1, 0, 1, "no", rng.uniform(0.05, 0.15), 0);
    arc(2, 1, 2, "up", rng.uniform(0.85, 0.95), 1);
    arc(3, 1, 2, "down", rng.uniform(0.05, 0.15), 0);
    h.source_node_id = 0;
    h.sink_node_id = 2;
    h.onebest_arc_ids = {0, 2};
    corpus.push_back(std::move(h));
  }
  return corpus;
}

}  // namespace

TEST_CASE("feature extraction basics") {
  Hwcn h = labeled_fig1();
  const auto feats = extract_features(h);
  REQUIRE(feats.size() == h.arcs.size());
  const HwcnIndex idx = HwcnIndex::build(h);
  for (size_t i = 0; i < h.arcs.size(); ++i) {
    const ArcFeatures& f = feats[i];
    CHECK(f.values[ArcFeatures::kIsSilence] ==
          (h.arcs[i].is_silence() ? 1.0 : 0.0));
    const bool on_best =
        std::find(h.onebest_arc_ids.begin(), h.onebest_arc_ids.end(),
                  h.arcs[i].id) != h.onebest_arc_ids.end();
    CHECK(f.values[ArcFeatures::kOnOnebest] == (on_best ? 1.0 : 0.0));
    for (double v : f.values) CHECK(std::isfinite(v));
  }

  // Silence arc flips the indicator.
  Hwcn with_sil = h;
  with_sil.arcs[0].word = kSilenceWord;
  const auto feats2 = extract_features(with_sil);
  CHECK(feats2[0].values[ArcFeatures::kIsSilence] == 1.0);
  (void)idx;
}

TEST_CASE("hashed embedding is deterministic and bounded") {
  const auto e1 = word_embedding("hello");
  const auto e2 = word_embedding("hello");
  const auto e3 = word_embedding("world");
  CHECK(e1 == e2);
  CHECK(e1 != e3);
  for (double v : e1) {
    CHECK(v >= -1.0);
    CHECK(v <= 1.0);
  }
}

TEST_CASE("posterior passthrough reproduces the posterior") {
  Hwcn h = labeled_fig1();
  for (HwcnArc& a : h.arcs) a.merged_log_posterior = std::log(0.5);
  const ConfidenceModel m = make_model(ModelKind::kPosteriorPassthrough);
  const Hwcn scored = score_arcs(m, h);
  for (const HwcnArc& a : scored.arcs) {
    CHECK(*a.confidence == doctest::Approx(0.5).epsilon(1e-12));
  }
}

TEST_CASE("zero-initialized logistic scores 0.5 everywhere") {
  const Hwcn h = labeled_fig1();
  const ConfidenceModel m = make_model(ModelKind::kLogistic);
  const Hwcn scored = score_arcs(m, h);
  for (const HwcnArc& a : scored.arcs) {
    CHECK(*a.confidence == doctest::Approx(0.5));
  }
}

TEST_CASE("fixed-seed recurrent model scores are bit-stable") {
  const Hwcn h = labeled_fig1();
  const ConfidenceModel m = make_model(ModelKind::kLatticeRnn, 8, 4, 77);
  const Hwcn s1 = score_arcs(m, h);
  const Hwcn s2 = score_arcs(m, h);
  CHECK(serialize_hwcn(s1) == serialize_hwcn(s2));
  for (const HwcnArc& a : s1.arcs) {
    CHECK(*a.confidence > 0.0);
    CHECK(*a.confidence < 1.0);
  }
  // A different seed gives different parameters.
  const ConfidenceModel m2 = make_model(ModelKind::kLatticeRnn, 8, 4, 78);
  CHECK(m.params != m2.params);
}

TEST_CASE("training drives the loss down on a separable corpus") {
  const auto corpus = separable_corpus(30);
  ConfidenceModel m = make_model(ModelKind::kLogistic);
  TrainConfig cfg;
  cfg.learning_rate = 2.0;
  cfg.epochs = 200;
  cfg.batch_size = 30;
  const TrainResult r = train(m, corpus, cfg);
  REQUIRE(r.loss_curve.size() == 200);
  CHECK(r.loss_curve.back() < 0.1);
  CHECK(r.loss_curve.back() <= r.loss_curve.front());
  // Full-batch descent on a convex loss: the curve never increases.
  for (size_t e = 1; e < r.loss_curve.size(); ++e) {
    REQUIRE(r.loss_curve[e] <= r.loss_curve[e - 1] + 1e-12);
  }
}

TEST_CASE("zero learning rate leaves parameters unchanged") {
  const auto corpus = separable_corpus(5);
  ConfidenceModel m = make_model(ModelKind::kLatticeRnn, 4, 4, 9);
  const std::vector<double> before = m.params;
  TrainConfig cfg;
  cfg.learning_rate = 0.0;
  cfg.epochs = 3;
  const TrainResult r = train(m, corpus, cfg);
  CHECK(r.model.params == before);
}

TEST_CASE("duplicated corpus trains to identical parameters under full batch") {
  const auto corpus = separable_corpus(8);
  std::vector<Hwcn> doubled;
  for (const Hwcn& h : corpus) doubled.push_back(h);
  for (const Hwcn& h : corpus) doubled.push_back(h);

  TrainConfig cfg;
  cfg.learning_rate = 0.7;
  cfg.epochs = 50;
  cfg.batch_size = 1000;  // full batch either way
  const ConfidenceModel m = make_model(ModelKind::kLogistic);
  const TrainResult r1 = train(m, corpus, cfg);
  const TrainResult r2 = train(m, doubled, cfg);
  REQUIRE(r1.model.params.size() == r2.model.params.size());
  for (size_t i = 0; i < r1.model.params.size(); ++i) {
    REQUIRE(r1.model.params[i] ==
            doctest::Approx(r2.model.params[i]).epsilon(1e-9));
  }
}

TEST_CASE("training determinism: same seed, same corpus, same bits") {
  const auto corpus = separable_corpus(10);
  TrainConfig cfg;
  cfg.learning_rate = 0.5;
  cfg.epochs = 20;
  const ConfidenceModel m = make_model(ModelKind::kLatticeRnn, 4, 4, 123);
  const TrainResult r1 = train(m, corpus, cfg);
  const TrainResult r2 = train(m, corpus, cfg);
  CHECK(r1.model.params == r2.model.params);
  CHECK(r1.loss_curve == r2.loss_curve);
}

TEST_CASE("divergent loss reports the epoch") {
  auto corpus = separable_corpus(2);
  // Poison one feature source so the forward pass turns non-finite.
  corpus[0].arcs[1].merged_acoustic_logp =
      std::numeric_limits<double>::quiet_NaN();
  ConfidenceModel m = make_model(ModelKind::kLogistic);
  TrainConfig cfg;
  cfg.epochs = 3;
  try {
    train(m, corpus, cfg);
    FAIL("expected TrainingError");
  } catch (const TrainingError& e) {
    CHECK(e.epoch() == 1);
  }
}

TEST_CASE("gradient check: logistic under 1e-6") {
  Hwcn h = labeled_fig1();
  ConfidenceModel m = make_model(ModelKind::kLogistic);
  // Check at a non-trivial parameter point.
  util::Rng rng(2024);
  for (double& p : m.params) p = rng.uniform(-0.5, 0.5);
  CHECK(gradient_check(m, h) < 1e-6);
}

TEST_CASE("gradient check: small recurrent config under 1e-4") {
  const Hwcn h = labeled_fig1();
  const ConfidenceModel m = make_model(ModelKind::kLatticeRnn, 4, 4, 5);
  CHECK(model_param_count(ModelKind::kLatticeRnn, 4, 4) <= 500);
  CHECK(gradient_check(m, h) < 1e-4);
}

TEST_CASE("bias-only case: analytic equals numeric almost exactly") {
  // All features identical across arcs standardize to zero, which leaves
  // only the bias active in a logistic model.
  Hwcn h;
  h.utterance_id = "bias";
  h.nodes = {{0, 0}, {1, 10}};
  for (int i = 0; i < 2; ++i) {
    HwcnArc a;
    a.id = i;
    a.start_node = 0;
    a.end_node = 1;
    a.word = i == 0 ? "aa" : "bb";
    a.merged_log_posterior = -1.0;
    a.merged_acoustic_logp = -2.0;
    a.merged_trans_logp = -1.0;
    a.source_arc_ids = {i};
    a.label = i;
    h.arcs.push_back(a);
  }
  h.source_node_id = 0;
  h.sink_node_id = 1;
  h.onebest_arc_ids = {0};

  ConfidenceModel m = make_model(ModelKind::kLogistic);
  m.params[kFeatureDim] = 0.3;  // bias
  std::vector<double> analytic;
  model_loss(m, h, &analytic);

  ConfidenceModel probe = m;
  const double step = 1e-5;
  probe.params[kFeatureDim] = m.params[kFeatureDim] + step;
  const double up = model_loss(probe, h);
  probe.params[kFeatureDim] = m.params[kFeatureDim] - step;
  const double down = model_loss(probe, h);
  const double numeric = (up - down) / (2.0 * step);
  CHECK(std::abs(analytic[kFeatureDim] - numeric) <= 1e-9);
}

TEST_CASE("scores stay inside (0,1) and finite on random networks") {
  const ConfidenceModel logistic = make_model(ModelKind::kLogistic);
  const ConfidenceModel rnn = make_model(ModelKind::kLatticeRnn, 8, 4, 3);
  for (uint64_t seed = 1; seed <= 50; ++seed) {
    Hwcn h = random_scored_hwcn(seed, 12);
    recompute_onebest(h, 1.0);
    for (const ConfidenceModel& m : {logistic, rnn}) {
      const Hwcn scored = score_arcs(m, h);
      for (const HwcnArc& a : scored.arcs) {
        REQUIRE(*a.confidence > 0.0);
        REQUIRE(*a.confidence < 1.0);
      }
    }
  }
}

TEST_CASE("model files round-trip") {
  const auto corpus = separable_corpus(6);
  TrainConfig cfg;
  cfg.epochs = 10;
  const TrainResult r =
      train(make_model(ModelKind::kLatticeRnn, 4, 4, 11), corpus, cfg);
  const std::string text = serialize_model(r.model);
  const ConfidenceModel loaded = parse_model(text);
  CHECK(loaded.kind == r.model.kind);
  CHECK(loaded.state_dim == r.model.state_dim);
  CHECK(loaded.hidden_dim == r.model.hidden_dim);
  CHECK(loaded.seed == r.model.seed);
  // One serialization pass is a fixed point.
  CHECK(serialize_model(loaded) == text);
}

TEST_CASE("training rejects unlabeled corpora and passthrough models") {
  const Hwcn unlabeled = build_hwcn(forward_backward(load_fig1(), 1.0), 0);
  TrainConfig cfg;
  CHECK_THROWS_AS(train(make_model(ModelKind::kLogistic), {unlabeled}, cfg),
                  ContractError);
  const auto corpus = separable_corpus(2);
  CHECK_THROWS_AS(
      train(make_model(ModelKind::kPosteriorPassthrough), corpus, cfg),
      ContractError);
}
