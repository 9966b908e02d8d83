#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "latconf/features.hpp"
#include "latconf/hwcn.hpp"

namespace latconf {

enum class ModelKind {
  kPosteriorPassthrough,  // confidence = exp(merged log posterior)
  kLogistic,              // sigmoid(w . x + b)
  kLatticeRnn,            // bidirectional lattice-recurrent model
};

const char* model_kind_name(ModelKind kind);
ModelKind model_kind_from_name(const std::string& name);

// Trainable per-arc confidence model. Parameters live in one flat vector;
// the slice layout is fixed by (kind, state_dim, hidden_dim). Feature
// standardization (z-score of the scalar features, identity for the
// embedding block) is estimated during training and stored with the model.
struct ConfidenceModel {
  ModelKind kind = ModelKind::kPosteriorPassthrough;
  int state_dim = 16;   // arc/node state width of the recurrent model
  int hidden_dim = 8;   // hidden layer width of the output head
  uint64_t seed = 1;    // fixes parameter initialization
  std::vector<double> params;
  std::array<double, kFeatureDim> feature_mean{};
  std::array<double, kFeatureDim> feature_std{};
};

// Number of parameters implied by (kind, state_dim, hidden_dim).
size_t model_param_count(ModelKind kind, int state_dim, int hidden_dim);

// Logistic models start at zero; recurrent models draw uniform values from
// a seed-fixed stream scaled by fan-in.
ConfidenceModel make_model(ModelKind kind, int state_dim = 16,
                           int hidden_dim = 8, uint64_t seed = 1);

struct TrainConfig {
  double learning_rate = 0.5;
  int epochs = 100;
  int batch_size = 32;  // utterances per gradient step
  double l2 = 0.0;
  uint64_t seed = 1;
};

struct TrainResult {
  ConfidenceModel model;
  std::vector<double> loss_curve;  // mean cross-entropy per epoch
};

// Fills every arc's confidence, in (0,1). Throws NumericError naming the
// arc if an activation is non-finite.
Hwcn score_arcs(const ConfidenceModel& m, const Hwcn& h);

// Mini-batch gradient descent on the mean binary cross-entropy over all
// arcs. Batches are consecutive utterance chunks in corpus order, so a fixed
// corpus yields bit-identical parameters. Requires labels on every arc and a
// trainable kind. Throws TrainingError if the loss becomes non-finite.
TrainResult train(const ConfidenceModel& m, const std::vector<Hwcn>& corpus,
                  const TrainConfig& cfg);

// Compares the analytic gradient of the mean cross-entropy on one labeled
// network against central finite differences (step 1e-5). Returns the
// largest guarded relative error over all parameters. Only valid for small
// configurations (at most 500 parameters).
double gradient_check(const ConfidenceModel& m, const Hwcn& h);

// Mean binary cross-entropy and its analytic gradient on one labeled
// network. Exposed for the finite-difference harness and tests.
double model_loss(const ConfidenceModel& m, const Hwcn& h,
                  std::vector<double>* gradient = nullptr);

std::string serialize_model(const ConfidenceModel& m);
ConfidenceModel parse_model(const std::string& text);

}  // namespace latconf
