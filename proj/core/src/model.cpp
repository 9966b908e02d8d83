#include "latconf/model.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <set>
#include <sstream>

#include "latconf/error.hpp"
#include "latconf/util.hpp"
#include "path_search.hpp"

namespace latconf {

using util::sigmoid;
using util::softplus;

const char* model_kind_name(ModelKind kind) {
  switch (kind) {
    case ModelKind::kPosteriorPassthrough:
      return "posterior_passthrough";
    case ModelKind::kLogistic:
      return "logistic";
    case ModelKind::kLatticeRnn:
      return "lattice_rnn";
  }
  return "unknown";
}

ModelKind model_kind_from_name(const std::string& name) {
  if (name == "posterior_passthrough") return ModelKind::kPosteriorPassthrough;
  if (name == "logistic") return ModelKind::kLogistic;
  if (name == "lattice_rnn") return ModelKind::kLatticeRnn;
  throw ParseError("unknown model kind '" + name + "'");
}

namespace {

constexpr int F = kFeatureDim;

// Slice offsets into the flat parameter vector of the recurrent model.
struct RnnLayout {
  int D;
  int H;
  size_t u_fwd, v_fwd, b_fwd;
  size_t u_bwd, v_bwd, b_bwd;
  size_t w_hidden, b_hidden, w_out, b_out;
  size_t total;

  RnnLayout(int state_dim, int hidden_dim) : D(state_dim), H(hidden_dim) {
    size_t off = 0;
    u_fwd = off, off += static_cast<size_t>(D) * F;
    v_fwd = off, off += static_cast<size_t>(D) * D;
    b_fwd = off, off += D;
    u_bwd = off, off += static_cast<size_t>(D) * F;
    v_bwd = off, off += static_cast<size_t>(D) * D;
    b_bwd = off, off += D;
    w_hidden = off, off += static_cast<size_t>(H) * (F + 2 * D);
    b_hidden = off, off += H;
    w_out = off, off += H;
    b_out = off, off += 1;
    total = off;
  }
};

}  // namespace

size_t model_param_count(ModelKind kind, int state_dim, int hidden_dim) {
  switch (kind) {
    case ModelKind::kPosteriorPassthrough:
      return 0;
    case ModelKind::kLogistic:
      return F + 1;
    case ModelKind::kLatticeRnn:
      return RnnLayout(state_dim, hidden_dim).total;
  }
  return 0;
}

ConfidenceModel make_model(ModelKind kind, int state_dim, int hidden_dim,
                           uint64_t seed) {
  if (state_dim < 1 || hidden_dim < 1) {
    throw ContractError("state_dim and hidden_dim must be positive");
  }
  ConfidenceModel m;
  m.kind = kind;
  m.state_dim = state_dim;
  m.hidden_dim = hidden_dim;
  m.seed = seed;
  m.params.assign(model_param_count(kind, state_dim, hidden_dim), 0.0);
  m.feature_mean.fill(0.0);
  m.feature_std.fill(1.0);

  if (kind == ModelKind::kLatticeRnn) {
    const RnnLayout lay(state_dim, hidden_dim);
    util::Rng rng(seed);
    auto fill = [&](size_t off, size_t count, int fan_in) {
      const double r = 1.0 / std::sqrt(static_cast<double>(fan_in));
      for (size_t i = 0; i < count; ++i) {
        m.params[off + i] = rng.uniform(-r, r);
      }
    };
    fill(lay.u_fwd, static_cast<size_t>(lay.D) * F, F);
    fill(lay.v_fwd, static_cast<size_t>(lay.D) * lay.D, lay.D);
    fill(lay.u_bwd, static_cast<size_t>(lay.D) * F, F);
    fill(lay.v_bwd, static_cast<size_t>(lay.D) * lay.D, lay.D);
    fill(lay.w_hidden, static_cast<size_t>(lay.H) * (F + 2 * lay.D),
         F + 2 * lay.D);
    fill(lay.w_out, lay.H, lay.H);
    // biases stay zero
  }
  return m;
}

namespace {

// Preprocessed utterance: adjacency, a time-ordered node sequence, and
// standardized features per arc position.
struct UttData {
  const Hwcn* h = nullptr;
  HwcnIndex idx;
  std::vector<int> topo;  // node positions
  std::vector<std::array<double, F>> x;
  std::vector<int> labels;  // -1 when unlabeled
};

UttData prepare_utt(const ConfidenceModel& m, const Hwcn& h) {
  UttData d;
  d.h = &h;
  d.idx = HwcnIndex::build(h);
  d.topo = internal::hwcn_topo_positions(h, d.idx);
  const auto feats = extract_features(h);
  d.x.resize(feats.size());
  for (size_t i = 0; i < feats.size(); ++i) {
    for (int k = 0; k < F; ++k) {
      d.x[i][k] = (feats[i].values[k] - m.feature_mean[k]) / m.feature_std[k];
    }
  }
  d.labels.resize(h.arcs.size());
  for (size_t i = 0; i < h.arcs.size(); ++i) {
    d.labels[i] = h.arcs[i].label.value_or(-1);
  }
  return d;
}

// Activations of one forward pass, kept for backpropagation.
struct RnnTrace {
  std::vector<std::array<double, F>> const* x = nullptr;
  std::vector<std::vector<double>> arc_fwd;   // per arc, D
  std::vector<std::vector<double>> arc_bwd;   // per arc, D
  std::vector<std::vector<double>> node_fwd;  // per node, D
  std::vector<std::vector<double>> node_bwd;  // per node, D
  std::vector<std::vector<double>> hidden;    // per arc, H
  std::vector<double> logit;                  // per arc
};

void rnn_forward(const ConfidenceModel& m, const UttData& d, RnnTrace* t) {
  const RnnLayout lay(m.state_dim, m.hidden_dim);
  const int D = lay.D;
  const int H = lay.H;
  const double* P = m.params.data();
  const size_t n_arcs = d.h->arcs.size();
  const size_t n_nodes = d.h->nodes.size();

  t->x = &d.x;
  t->arc_fwd.assign(n_arcs, std::vector<double>(D, 0.0));
  t->arc_bwd.assign(n_arcs, std::vector<double>(D, 0.0));
  t->node_fwd.assign(n_nodes, std::vector<double>(D, 0.0));
  t->node_bwd.assign(n_nodes, std::vector<double>(D, 0.0));
  t->hidden.assign(n_arcs, std::vector<double>(H, 0.0));
  t->logit.assign(n_arcs, 0.0);

  // Forward node states: mean of the transformed incoming arc states.
  for (int v : d.topo) {
    const auto& in = d.idx.in_arcs[v];
    if (in.empty()) continue;
    for (int ai : in) {
      const int s = d.idx.node_pos.at(d.h->arcs[ai].start_node);
      for (int r = 0; r < D; ++r) {
        double z = P[lay.b_fwd + r];
        const double* u_row = P + lay.u_fwd + static_cast<size_t>(r) * F;
        for (int k = 0; k < F; ++k) z += u_row[k] * d.x[ai][k];
        const double* v_row = P + lay.v_fwd + static_cast<size_t>(r) * D;
        for (int k = 0; k < D; ++k) z += v_row[k] * t->node_fwd[s][k];
        t->arc_fwd[ai][r] = std::tanh(z);
      }
      for (int r = 0; r < D; ++r) t->node_fwd[v][r] += t->arc_fwd[ai][r];
    }
    for (int r = 0; r < D; ++r) {
      t->node_fwd[v][r] /= static_cast<double>(in.size());
    }
  }

  // Backward node states, symmetrically over outgoing arcs.
  for (auto it = d.topo.rbegin(); it != d.topo.rend(); ++it) {
    const int v = *it;
    const auto& out = d.idx.out_arcs[v];
    if (out.empty()) continue;
    for (int ai : out) {
      const int e = d.idx.node_pos.at(d.h->arcs[ai].end_node);
      for (int r = 0; r < D; ++r) {
        double z = P[lay.b_bwd + r];
        const double* u_row = P + lay.u_bwd + static_cast<size_t>(r) * F;
        for (int k = 0; k < F; ++k) z += u_row[k] * d.x[ai][k];
        const double* v_row = P + lay.v_bwd + static_cast<size_t>(r) * D;
        for (int k = 0; k < D; ++k) z += v_row[k] * t->node_bwd[e][k];
        t->arc_bwd[ai][r] = std::tanh(z);
      }
      for (int r = 0; r < D; ++r) t->node_bwd[v][r] += t->arc_bwd[ai][r];
    }
    for (int r = 0; r < D; ++r) {
      t->node_bwd[v][r] /= static_cast<double>(out.size());
    }
  }

  // Output head: [features, fwd(start), bwd(end)] -> tanh hidden -> logit.
  const int Z = F + 2 * D;
  for (size_t ai = 0; ai < n_arcs; ++ai) {
    const int s = d.idx.node_pos.at(d.h->arcs[ai].start_node);
    const int e = d.idx.node_pos.at(d.h->arcs[ai].end_node);
    double logit = P[lay.b_out];
    for (int r = 0; r < H; ++r) {
      double z = P[lay.b_hidden + r];
      const double* w_row = P + lay.w_hidden + static_cast<size_t>(r) * Z;
      for (int k = 0; k < F; ++k) z += w_row[k] * d.x[ai][k];
      for (int k = 0; k < D; ++k) z += w_row[F + k] * t->node_fwd[s][k];
      for (int k = 0; k < D; ++k) z += w_row[F + D + k] * t->node_bwd[e][k];
      t->hidden[ai][r] = std::tanh(z);
      logit += P[lay.w_out + r] * t->hidden[ai][r];
    }
    t->logit[ai] = logit;
  }
}

// Accumulates the summed cross-entropy and its gradient for one utterance.
// The caller divides by the total arc count.
void rnn_backward(const ConfidenceModel& m, const UttData& d,
                  const RnnTrace& t, double* loss_sum, double* grad) {
  const RnnLayout lay(m.state_dim, m.hidden_dim);
  const int D = lay.D;
  const int H = lay.H;
  const int Z = F + 2 * D;
  const double* P = m.params.data();
  const size_t n_arcs = d.h->arcs.size();
  const size_t n_nodes = d.h->nodes.size();

  std::vector<std::vector<double>> g_node_fwd(n_nodes,
                                              std::vector<double>(D, 0.0));
  std::vector<std::vector<double>> g_node_bwd(n_nodes,
                                              std::vector<double>(D, 0.0));

  for (size_t ai = 0; ai < n_arcs; ++ai) {
    const int label = d.labels[ai];
    const double logit = t.logit[ai];
    *loss_sum += softplus(logit) - label * logit;
    const double gl = sigmoid(logit) - label;
    const int s = d.idx.node_pos.at(d.h->arcs[ai].start_node);
    const int e = d.idx.node_pos.at(d.h->arcs[ai].end_node);
    grad[lay.b_out] += gl;
    for (int r = 0; r < H; ++r) {
      grad[lay.w_out + r] += gl * t.hidden[ai][r];
      const double gh = gl * P[lay.w_out + r];
      const double gpre = gh * (1.0 - t.hidden[ai][r] * t.hidden[ai][r]);
      grad[lay.b_hidden + r] += gpre;
      double* gw_row = grad + lay.w_hidden + static_cast<size_t>(r) * Z;
      const double* w_row = P + lay.w_hidden + static_cast<size_t>(r) * Z;
      for (int k = 0; k < F; ++k) gw_row[k] += gpre * d.x[ai][k];
      for (int k = 0; k < D; ++k) {
        gw_row[F + k] += gpre * t.node_fwd[s][k];
        g_node_fwd[s][k] += gpre * w_row[F + k];
      }
      for (int k = 0; k < D; ++k) {
        gw_row[F + D + k] += gpre * t.node_bwd[e][k];
        g_node_bwd[e][k] += gpre * w_row[F + D + k];
      }
    }
  }

  // Forward states were built in topological order; unwind in reverse.
  for (auto it = d.topo.rbegin(); it != d.topo.rend(); ++it) {
    const int v = *it;
    const auto& in = d.idx.in_arcs[v];
    if (in.empty()) continue;
    const double inv_n = 1.0 / static_cast<double>(in.size());
    for (int ai : in) {
      const int s = d.idx.node_pos.at(d.h->arcs[ai].start_node);
      for (int r = 0; r < D; ++r) {
        const double ga = g_node_fwd[v][r] * inv_n;
        const double a = t.arc_fwd[ai][r];
        const double gpre = ga * (1.0 - a * a);
        grad[lay.b_fwd + r] += gpre;
        double* gu_row = grad + lay.u_fwd + static_cast<size_t>(r) * F;
        for (int k = 0; k < F; ++k) gu_row[k] += gpre * d.x[ai][k];
        double* gv_row = grad + lay.v_fwd + static_cast<size_t>(r) * D;
        const double* v_row = P + lay.v_fwd + static_cast<size_t>(r) * D;
        for (int k = 0; k < D; ++k) {
          gv_row[k] += gpre * t.node_fwd[s][k];
          g_node_fwd[s][k] += gpre * v_row[k];
        }
      }
    }
  }

  // Backward states were built in reverse order; unwind forward.
  for (int v : d.topo) {
    const auto& out = d.idx.out_arcs[v];
    if (out.empty()) continue;
    const double inv_n = 1.0 / static_cast<double>(out.size());
    for (int ai : out) {
      const int e = d.idx.node_pos.at(d.h->arcs[ai].end_node);
      for (int r = 0; r < D; ++r) {
        const double ga = g_node_bwd[v][r] * inv_n;
        const double a = t.arc_bwd[ai][r];
        const double gpre = ga * (1.0 - a * a);
        grad[lay.b_bwd + r] += gpre;
        double* gu_row = grad + lay.u_bwd + static_cast<size_t>(r) * F;
        for (int k = 0; k < F; ++k) gu_row[k] += gpre * d.x[ai][k];
        double* gv_row = grad + lay.v_bwd + static_cast<size_t>(r) * D;
        const double* v_row = P + lay.v_bwd + static_cast<size_t>(r) * D;
        for (int k = 0; k < D; ++k) {
          gv_row[k] += gpre * t.node_bwd[e][k];
          g_node_bwd[e][k] += gpre * v_row[k];
        }
      }
    }
  }
}

std::vector<double> logistic_logits(const ConfidenceModel& m,
                                    const UttData& d) {
  std::vector<double> logits(d.x.size());
  for (size_t ai = 0; ai < d.x.size(); ++ai) {
    double z = m.params[F];
    for (int k = 0; k < F; ++k) z += m.params[k] * d.x[ai][k];
    logits[ai] = z;
  }
  return logits;
}

void logistic_backward(const ConfidenceModel& m, const UttData& d,
                       const std::vector<double>& logits, double* loss_sum,
                       double* grad) {
  (void)m;
  for (size_t ai = 0; ai < logits.size(); ++ai) {
    const int label = d.labels[ai];
    *loss_sum += softplus(logits[ai]) - label * logits[ai];
    const double gl = sigmoid(logits[ai]) - label;
    for (int k = 0; k < F; ++k) grad[k] += gl * d.x[ai][k];
    grad[F] += gl;
  }
}

// Summed loss/gradient over one utterance (unnormalized).
void accumulate_utterance(const ConfidenceModel& m, const UttData& d,
                          double* loss_sum, double* grad) {
  if (m.kind == ModelKind::kLogistic) {
    const auto logits = logistic_logits(m, d);
    logistic_backward(m, d, logits, loss_sum, grad);
  } else {
    RnnTrace t;
    rnn_forward(m, d, &t);
    rnn_backward(m, d, t, loss_sum, grad);
  }
}

void check_labeled(const Hwcn& h) {
  for (const HwcnArc& a : h.arcs) {
    if (!a.label) {
      throw ContractError("arc " + std::to_string(a.id) + " of utterance " +
                          h.utterance_id + " has no label");
    }
  }
}

}  // namespace

Hwcn score_arcs(const ConfidenceModel& m, const Hwcn& h) {
  Hwcn out = h;
  if (m.kind == ModelKind::kPosteriorPassthrough) {
    for (HwcnArc& a : out.arcs) {
      const double p = std::exp(a.merged_log_posterior);
      a.confidence = std::clamp(p, 1e-9, 1.0 - 1e-9);
    }
    return out;
  }

  if (m.params.size() != model_param_count(m.kind, m.state_dim, m.hidden_dim)) {
    throw ContractError("parameter vector length inconsistent with model");
  }
  const UttData d = prepare_utt(m, h);
  std::vector<double> logits;
  if (m.kind == ModelKind::kLogistic) {
    logits = logistic_logits(m, d);
  } else {
    RnnTrace t;
    rnn_forward(m, d, &t);
    logits = std::move(t.logit);
  }
  for (size_t ai = 0; ai < logits.size(); ++ai) {
    if (!std::isfinite(logits[ai])) {
      throw NumericError("non-finite activation on arc " +
                         std::to_string(h.arcs[ai].id));
    }
    out.arcs[ai].confidence =
        std::clamp(sigmoid(logits[ai]), 1e-12, 1.0 - 1e-12);
  }
  return out;
}

double model_loss(const ConfidenceModel& m, const Hwcn& h,
                  std::vector<double>* gradient) {
  if (m.kind == ModelKind::kPosteriorPassthrough) {
    throw ContractError("posterior_passthrough has no trainable loss");
  }
  check_labeled(h);
  const UttData d = prepare_utt(m, h);
  std::vector<double> grad(m.params.size(), 0.0);
  double loss_sum = 0.0;
  accumulate_utterance(m, d, &loss_sum, grad.data());
  const double inv = 1.0 / static_cast<double>(h.arcs.size());
  if (gradient) {
    gradient->assign(grad.size(), 0.0);
    for (size_t i = 0; i < grad.size(); ++i) (*gradient)[i] = grad[i] * inv;
  }
  return loss_sum * inv;
}

TrainResult train(const ConfidenceModel& m, const std::vector<Hwcn>& corpus,
                  const TrainConfig& cfg) {
  if (m.kind == ModelKind::kPosteriorPassthrough) {
    throw ContractError("posterior_passthrough is not trainable");
  }
  if (corpus.empty()) throw ContractError("empty training corpus");
  if (cfg.learning_rate < 0.0 || cfg.l2 < 0.0 || cfg.epochs < 0 ||
      cfg.batch_size < 1) {
    throw ContractError("invalid training configuration");
  }
  for (const Hwcn& h : corpus) check_labeled(h);

  TrainResult result;
  result.model = m;
  ConfidenceModel& model = result.model;
  if (model.params.size() !=
      model_param_count(model.kind, model.state_dim, model.hidden_dim)) {
    throw ContractError("parameter vector length inconsistent with model");
  }

  // Standardize the scalar features on this corpus; the embedding block is
  // already bounded and keeps identity scaling.
  {
    std::array<double, F> sum{};
    std::array<double, F> sum_sq{};
    size_t count = 0;
    for (const Hwcn& h : corpus) {
      for (const ArcFeatures& f : extract_features(h)) {
        for (int k = 0; k < F; ++k) {
          sum[k] += f.values[k];
          sum_sq[k] += f.values[k] * f.values[k];
        }
        ++count;
      }
    }
    for (int k = kEmbeddingDim; k < F; ++k) {
      const double mean = sum[k] / count;
      const double var = std::max(0.0, sum_sq[k] / count - mean * mean);
      const double sd = std::sqrt(var);
      model.feature_mean[k] = mean;
      model.feature_std[k] = sd < 1e-12 ? 1.0 : sd;
    }
  }

  std::vector<UttData> data;
  data.reserve(corpus.size());
  size_t total_arcs = 0;
  for (const Hwcn& h : corpus) {
    data.push_back(prepare_utt(model, h));
    total_arcs += h.arcs.size();
  }
  if (total_arcs == 0) throw ContractError("corpus has no arcs");

  std::vector<double> grad(model.params.size());
  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    double epoch_loss_sum = 0.0;
    for (size_t begin = 0; begin < data.size();
         begin += static_cast<size_t>(cfg.batch_size)) {
      const size_t end =
          std::min(data.size(), begin + static_cast<size_t>(cfg.batch_size));
      std::fill(grad.begin(), grad.end(), 0.0);
      double loss_sum = 0.0;
      size_t batch_arcs = 0;
      for (size_t u = begin; u < end; ++u) {
        accumulate_utterance(model, data[u], &loss_sum, grad.data());
        batch_arcs += data[u].h->arcs.size();
      }
      const double batch_loss = loss_sum / batch_arcs;
      if (!std::isfinite(batch_loss)) {
        throw TrainingError("training diverged, loss is not finite", epoch);
      }
      epoch_loss_sum += loss_sum;
      const double inv = 1.0 / static_cast<double>(batch_arcs);
      for (size_t i = 0; i < model.params.size(); ++i) {
        model.params[i] -= cfg.learning_rate *
                           (grad[i] * inv + cfg.l2 * model.params[i]);
      }
    }
    result.loss_curve.push_back(epoch_loss_sum / total_arcs);
  }
  return result;
}

double gradient_check(const ConfidenceModel& m, const Hwcn& h) {
  if (m.params.size() > 500) {
    throw ContractError("gradient_check requires at most 500 parameters");
  }
  std::vector<double> analytic;
  model_loss(m, h, &analytic);

  const double step = 1e-5;
  ConfidenceModel probe = m;
  double max_rel = 0.0;
  for (size_t i = 0; i < m.params.size(); ++i) {
    probe.params[i] = m.params[i] + step;
    const double up = model_loss(probe, h);
    probe.params[i] = m.params[i] - step;
    const double down = model_loss(probe, h);
    probe.params[i] = m.params[i];
    const double numeric = (up - down) / (2.0 * step);
    const double denom =
        std::max({std::abs(analytic[i]), std::abs(numeric), 1e-4});
    max_rel = std::max(max_rel, std::abs(analytic[i] - numeric) / denom);
  }
  return max_rel;
}

std::string serialize_model(const ConfidenceModel& m) {
  std::string out;
  out += "LATCONF_MODEL 1\n";
  out += "kind " + std::string(model_kind_name(m.kind)) + "\n";
  out += "state_dim " + std::to_string(m.state_dim) + "\n";
  out += "hidden_dim " + std::to_string(m.hidden_dim) + "\n";
  out += "seed " + std::to_string(m.seed) + "\n";
  out += "feature_dim " + std::to_string(F) + "\n";
  out += "feature_mean";
  for (double v : m.feature_mean) out += " " + util::format_sig9(v);
  out += "\nfeature_std";
  for (double v : m.feature_std) out += " " + util::format_sig9(v);
  out += "\nparam_count " + std::to_string(m.params.size()) + "\n";
  for (size_t i = 0; i < m.params.size(); ++i) {
    out += i % 8 == 0 ? (i == 0 ? "" : "\n") : " ";
    out += util::format_sig9(m.params[i]);
  }
  if (!m.params.empty()) out += "\n";
  return out;
}

ConfidenceModel parse_model(const std::string& text) {
  std::istringstream in(text);
  std::string tok;
  auto expect = [&](const char* key) {
    if (!(in >> tok) || tok != key) {
      throw ParseError(std::string("model file: expected '") + key + "'");
    }
  };
  expect("LATCONF_MODEL");
  int version = 0;
  in >> version;
  if (version != 1) throw ParseError("unsupported model format version");

  ConfidenceModel m;
  expect("kind");
  in >> tok;
  m.kind = model_kind_from_name(tok);
  expect("state_dim");
  in >> m.state_dim;
  expect("hidden_dim");
  in >> m.hidden_dim;
  expect("seed");
  in >> m.seed;
  expect("feature_dim");
  int fd = 0;
  in >> fd;
  if (fd != F) throw ParseError("unexpected feature_dim in model file");
  expect("feature_mean");
  for (double& v : m.feature_mean) in >> v;
  expect("feature_std");
  for (double& v : m.feature_std) in >> v;
  expect("param_count");
  size_t count = 0;
  in >> count;
  if (count != model_param_count(m.kind, m.state_dim, m.hidden_dim)) {
    throw ParseError("param_count inconsistent with model dimensions");
  }
  m.params.resize(count);
  for (double& v : m.params) {
    if (!(in >> v)) throw ParseError("truncated parameter block");
  }
  if (!in) throw ParseError("malformed model file");
  return m;
}

}  // namespace latconf
