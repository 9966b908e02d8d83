#include "latconf/posterior.hpp"

#include <algorithm>
#include <cmath>

#include "latconf/error.hpp"
#include "latconf/util.hpp"

namespace latconf {

using util::kLogZero;
using util::log_sum_exp;

namespace {

// Positions of l.nodes in topological order.
std::vector<int> topo_positions(const Lattice& l, const LatticeIndex& idx) {
  std::vector<int> order;
  order.reserve(l.nodes.size());
  for (int id : topological_order(l)) order.push_back(idx.node_pos.at(id));
  return order;
}

}  // namespace

PosteriorLattice forward_backward(const Lattice& l, double acoustic_scale) {
  if (!(acoustic_scale > 0.0) || !std::isfinite(acoustic_scale)) {
    throw ContractError("acoustic_scale must be positive and finite");
  }
  for (const Arc& a : l.arcs) {
    if (!std::isfinite(a.acoustic_logp) || !std::isfinite(a.trans_logp)) {
      throw NumericError("non-finite score on arc " + std::to_string(a.id));
    }
  }

  const LatticeIndex idx = LatticeIndex::build(l);
  const std::vector<int> order = topo_positions(l, idx);
  const int source = idx.node_pos.at(l.source_node_id);
  const int sink = idx.node_pos.at(l.sink_node_id);

  std::vector<double> arc_w(l.arcs.size());
  for (size_t i = 0; i < l.arcs.size(); ++i) {
    arc_w[i] =
        acoustic_scale * l.arcs[i].acoustic_logp + l.arcs[i].trans_logp;
  }

  std::vector<double> alpha(l.nodes.size(), kLogZero);
  alpha[source] = 0.0;
  for (int v : order) {
    for (int ai : idx.out_arcs[v]) {
      const int u = idx.node_pos.at(l.arcs[ai].end_node);
      alpha[u] = log_sum_exp(alpha[u], alpha[v] + arc_w[ai]);
    }
  }

  std::vector<double> beta(l.nodes.size(), kLogZero);
  beta[sink] = 0.0;
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    for (int ai : idx.in_arcs[*it]) {
      const int u = idx.node_pos.at(l.arcs[ai].start_node);
      beta[u] = log_sum_exp(beta[u], arc_w[ai] + beta[*it]);
    }
  }

  const double total = beta[source];
  if (!std::isfinite(total)) {
    throw NumericError("non-finite total path score in forward-backward");
  }

  PosteriorLattice out;
  out.lattice = l;
  out.acoustic_scale = acoustic_scale;
  out.arc_log_posterior.resize(l.arcs.size());
  for (size_t i = 0; i < l.arcs.size(); ++i) {
    const int s = idx.node_pos.at(l.arcs[i].start_node);
    const int e = idx.node_pos.at(l.arcs[i].end_node);
    // Rounding can push the dominant arc a hair above zero; clamp.
    out.arc_log_posterior[i] =
        std::min(0.0, alpha[s] + arc_w[i] + beta[e] - total);
  }

  const std::vector<double> priors = node_priors(l);
  out.node_log_prior = priors;
  return out;
}

std::vector<double> node_priors(const Lattice& l) {
  const LatticeIndex idx = LatticeIndex::build(l);
  const std::vector<int> order = topo_positions(l, idx);
  const int source = idx.node_pos.at(l.source_node_id);

  std::vector<double> prior(l.nodes.size(), kLogZero);
  prior[source] = 0.0;
  for (int v : order) {
    for (int ai : idx.out_arcs[v]) {
      const int u = idx.node_pos.at(l.arcs[ai].end_node);
      prior[u] = log_sum_exp(prior[u], prior[v] + l.arcs[ai].trans_logp);
    }
  }
  for (double& p : prior) p = std::min(0.0, p);
  return prior;
}

}  // namespace latconf
