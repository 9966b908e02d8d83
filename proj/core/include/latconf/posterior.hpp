#pragma once

#include <vector>

#include "latconf/lattice.hpp"

namespace latconf {

// Lattice plus arc posteriors and node priors, all in the natural-log domain.
// arc_log_posterior and node_log_prior are indexed by position in
// lattice.arcs / lattice.nodes.
struct PosteriorLattice {
  Lattice lattice;
  std::vector<double> arc_log_posterior;  // <= 0
  std::vector<double> node_log_prior;     // <= 0, source exactly 0
  double acoustic_scale = 1.0;
};

// Arc posteriors P(e|X) by forward-backward over
// acoustic_scale * acoustic_logp + trans_logp, accumulated with log-sum-exp.
// For every cut separating source from sink, the posteriors of the crossing
// arcs sum to one. Throws NumericError if any input score is non-finite.
PosteriorLattice forward_backward(const Lattice& l, double acoustic_scale);

// Node priors from a lattice-forward pass over the transitional scores alone:
// P(source) = 1 and P(v) = sum over incoming arcs e of
// P(start(e)) * exp(trans_logp(e)). Returned in log domain, indexed by
// position in l.nodes. Not normalized across nodes.
std::vector<double> node_priors(const Lattice& l);

}  // namespace latconf
