#include <benchmark/benchmark.h>

#include <cmath>

#include "latconf/decoder.hpp"
#include "latconf/hwcn.hpp"
#include "latconf/model.hpp"
#include "latconf/posterior.hpp"
#include "latconf/util.hpp"

using namespace latconf;

namespace {

// Chain of `slots` segments with `width` competing arcs each.
Lattice make_lattice(int slots, int width) {
  latconf::util::Rng rng(99);
  Lattice l;
  l.utterance_id = "bench";
  l.frame_ms = 10;
  for (int i = 0; i <= slots; ++i) l.nodes.push_back({i, i * 20});
  int arc_id = 0;
  for (int s = 0; s < slots; ++s) {
    for (int w = 0; w < width; ++w) {
      Arc a;
      a.id = arc_id++;
      a.start_node = s;
      a.end_node = s + 1;
      a.word = "w" + std::to_string(w);
      a.acoustic_logp = rng.uniform(-4.0, -1.0);
      a.trans_logp = std::log(1.0 / width);
      l.arcs.push_back(a);
    }
  }
  l.source_node_id = 0;
  l.sink_node_id = slots;
  return l;
}

void BM_forward_backward(benchmark::State& state) {
  const Lattice l = make_lattice(static_cast<int>(state.range(0)), 4);
  for (auto _ : state) {
    benchmark::DoNotOptimize(forward_backward(l, 1.0 / 12.0));
  }
}
BENCHMARK(BM_forward_backward)->Arg(16)->Arg(128)->Arg(1024);

void BM_build_hwcn(benchmark::State& state) {
  const Lattice l = make_lattice(static_cast<int>(state.range(0)), 4);
  const PosteriorLattice p = forward_backward(l, 1.0 / 12.0);
  for (auto _ : state) {
    benchmark::DoNotOptimize(build_hwcn(p, 10));
  }
}
BENCHMARK(BM_build_hwcn)->Arg(16)->Arg(128)->Arg(1024);

void BM_decode_max_mean(benchmark::State& state) {
  const Lattice l = make_lattice(static_cast<int>(state.range(0)), 4);
  const PosteriorLattice p = forward_backward(l, 1.0 / 12.0);
  Hwcn h = build_hwcn(p, 0);
  latconf::util::Rng rng(7);
  for (HwcnArc& a : h.arcs) a.confidence = rng.uniform(0.01, 0.99);
  for (auto _ : state) {
    benchmark::DoNotOptimize(decode_max_mean(h));
  }
}
BENCHMARK(BM_decode_max_mean)->Arg(16)->Arg(128)->Arg(1024);

void BM_score_arcs_rnn(benchmark::State& state) {
  const Lattice l = make_lattice(static_cast<int>(state.range(0)), 4);
  const PosteriorLattice p = forward_backward(l, 1.0 / 12.0);
  const Hwcn h = build_hwcn(p, 0);
  const ConfidenceModel m = make_model(ModelKind::kLatticeRnn, 16, 8, 1);
  for (auto _ : state) {
    benchmark::DoNotOptimize(score_arcs(m, h));
  }
}
BENCHMARK(BM_score_arcs_rnn)->Arg(16)->Arg(128);

}  // namespace

BENCHMARK_MAIN();
