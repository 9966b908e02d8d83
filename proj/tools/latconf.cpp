// latconf: word-lattice confidence toolkit.
//
// Subcommands wire the pipeline end to end:
//   gen -> hwcn -> train -> score -> decode -> eval
//                        \-> calibrate (fit / apply) -> combine

#include <cstdio>
#include <filesystem>
#include <iostream>

#include "CLI11.hpp"
#include "cli_common.hpp"
#include "latconf/calibration.hpp"
#include "latconf/combine.hpp"
#include "latconf/decoder.hpp"
#include "latconf/error.hpp"
#include "latconf/hwcn.hpp"
#include "latconf/lattice.hpp"
#include "latconf/metrics.hpp"
#include "latconf/model.hpp"
#include "latconf/posterior.hpp"
#include "latconf/simgen.hpp"
#include "latconf/util.hpp"
#include "latconf/version.hpp"

namespace fs = std::filesystem;
using namespace latconf;
using cli::Manifest;

namespace {

struct GenOptions {
  std::string config_path;
  std::string out_dir;
};

int cmd_gen(const GenOptions& opt) {
  Manifest manifest("gen");
  const SimConfig cfg = parse_sim_config(util::read_text_file(opt.config_path));
  manifest.input("config", opt.config_path);
  manifest.output("corpus", opt.out_dir);
  manifest.flag("seed", cfg.seed);

  const GeneratedCorpus corpus = generate_corpus(cfg);
  fs::create_directories(opt.out_dir);
  util::write_text_file((fs::path(opt.out_dir) / "refs.tsv").string(),
                        serialize_refs(corpus.refs));
  util::write_text_file((fs::path(opt.out_dir) / "config.txt").string(),
                        serialize_sim_config(cfg));
  std::string splits;
  for (const auto& [utt, words] : corpus.refs) {
    splits += utt + "\t" + split_name(split_of(utt)) + "\n";
  }
  util::write_text_file((fs::path(opt.out_dir) / "splits.tsv").string(),
                        splits);
  for (size_t r = 0; r < corpus.lattices.size(); ++r) {
    const fs::path rec_dir = fs::path(opt.out_dir) / ("rec" + std::to_string(r));
    fs::create_directories(rec_dir);
    std::string oracle;
    for (const auto& [utt, lattice] : corpus.lattices[r]) {
      util::write_text_file((rec_dir / (utt + ".lat")).string(),
                            serialize_lattice(lattice));
      oracle += utt + "\t" +
                util::format_sig9(corpus.oracle_correct_prob[r].at(utt)) + "\n";
    }
    util::write_text_file((rec_dir / "oracle.tsv").string(), oracle);
  }
  manifest.write_beside(opt.out_dir);
  std::printf("generated %d utterances for %zu recognizers into %s\n",
              cfg.utterance_count, cfg.recognizers.size(),
              opt.out_dir.c_str());
  return 0;
}

struct HwcnOptions {
  std::string lattice_dir;
  std::string out_dir;
  int tolerance_frames = kDefaultToleranceFrames;
  double acoustic_scale = kDefaultAcousticScale;
  std::string split = "all";
  int workers = cli::default_workers();
};

int cmd_hwcn(const HwcnOptions& opt) {
  Manifest manifest("hwcn");
  manifest.input("lattices", opt.lattice_dir);
  manifest.output("hwcns", opt.out_dir);
  manifest.flag("tolerance-frames", opt.tolerance_frames);
  manifest.flag("acoustic-scale", opt.acoustic_scale);
  manifest.flag("split", opt.split);
  manifest.flag("workers", opt.workers);

  const auto files = cli::corpus_files(opt.lattice_dir, ".lat", opt.split);
  fs::create_directories(opt.out_dir);
  cli::parallel_for(files.size(), opt.workers, [&](size_t i) {
    const Lattice l = parse_lattice(
        util::read_text_file((fs::path(opt.lattice_dir) / files[i]).string()));
    const PosteriorLattice p = forward_backward(l, opt.acoustic_scale);
    const Hwcn h = build_hwcn(p, opt.tolerance_frames);
    const std::string out_name =
        cli::utterance_of_filename(files[i]) + ".hwcn";
    util::write_text_file((fs::path(opt.out_dir) / out_name).string(),
                          serialize_hwcn(h));
  });
  manifest.write_beside(opt.out_dir);
  std::printf("built %zu networks into %s\n", files.size(),
              opt.out_dir.c_str());
  return 0;
}

// Labeled networks of one split, ready for training or calibration.
std::vector<Hwcn> load_labeled(const std::string& hwcn_dir,
                               const std::string& refs_path,
                               const std::string& split,
                               double acoustic_scale) {
  const WordsById refs = parse_refs(util::read_text_file(refs_path));
  std::vector<Hwcn> out;
  for (const std::string& f : cli::corpus_files(hwcn_dir, ".hwcn", split)) {
    Hwcn h =
        parse_hwcn(util::read_text_file((fs::path(hwcn_dir) / f).string()));
    recompute_onebest(h, acoustic_scale);
    const auto it = refs.find(h.utterance_id);
    if (it == refs.end()) {
      throw ContractError("no reference for utterance " + h.utterance_id);
    }
    out.push_back(label_arcs(h, it->second));
  }
  return out;
}

struct TrainOptions {
  std::string hwcn_dir;
  std::string refs_path;
  std::string out_path;
  std::string kind = "logistic";
  std::string split = "train";
  std::string dev_split = "dev";
  bool grid = false;
  std::string grid_state_dims = "8,16";
  std::string grid_hidden_dims = "4,8";
  int state_dim = 16;
  int hidden_dim = 8;
  double learning_rate = 0.5;
  int epochs = 100;
  int batch_size = 32;
  double l2 = 0.0;
  uint64_t seed = 1;
  double acoustic_scale = kDefaultAcousticScale;
  std::string arc_set = "all";
};

double dev_eer_of(const ConfidenceModel& m, const std::vector<Hwcn>& dev,
                  ArcSet arc_set) {
  std::vector<ScoredLabel> scores;
  for (const Hwcn& h : dev) {
    const Hwcn scored = score_arcs(m, h);
    const auto s = collect_arc_scores(scored, arc_set);
    scores.insert(scores.end(), s.begin(), s.end());
  }
  return eer(scores).first;
}

int cmd_train(const TrainOptions& opt) {
  Manifest manifest("train");
  manifest.input("hwcns", opt.hwcn_dir);
  manifest.input("refs", opt.refs_path);
  manifest.output("model", opt.out_path);
  manifest.flag("model-kind", opt.kind);
  manifest.flag("split", opt.split);
  manifest.flag("dev-split", opt.dev_split);
  manifest.flag("grid", opt.grid ? 1 : 0);
  manifest.flag("state-dim", opt.state_dim);
  manifest.flag("hidden-dim", opt.hidden_dim);
  manifest.flag("learning-rate", opt.learning_rate);
  manifest.flag("epochs", opt.epochs);
  manifest.flag("batch-size", opt.batch_size);
  manifest.flag("l2", opt.l2);
  manifest.flag("seed", opt.seed);
  manifest.flag("acoustic-scale", opt.acoustic_scale);
  manifest.flag("arc-set", opt.arc_set);

  const ModelKind kind = model_kind_from_name(opt.kind);
  const ArcSet arc_set =
      opt.arc_set == "competing" ? ArcSet::kCompeting : ArcSet::kAll;
  const std::vector<Hwcn> corpus =
      load_labeled(opt.hwcn_dir, opt.refs_path, opt.split, opt.acoustic_scale);
  if (corpus.empty()) throw ContractError("no training utterances found");

  TrainConfig cfg;
  cfg.learning_rate = opt.learning_rate;
  cfg.epochs = opt.epochs;
  cfg.batch_size = opt.batch_size;
  cfg.l2 = opt.l2;
  cfg.seed = opt.seed;

  struct Candidate {
    int state_dim;
    int hidden_dim;
  };
  std::vector<Candidate> candidates;
  if (opt.grid && kind == ModelKind::kLatticeRnn) {
    for (const std::string& d : util::split(opt.grid_state_dims, ',')) {
      for (const std::string& h : util::split(opt.grid_hidden_dims, ',')) {
        candidates.push_back({util::parse_int(d, "state dim"),
                              util::parse_int(h, "hidden dim")});
      }
    }
  } else {
    candidates.push_back({opt.state_dim, opt.hidden_dim});
  }

  std::vector<Hwcn> dev;
  if (candidates.size() > 1) {
    dev = load_labeled(opt.hwcn_dir, opt.refs_path, opt.dev_split,
                       opt.acoustic_scale);
    if (dev.empty()) throw ContractError("grid selection needs a dev split");
  }

  TrainResult best;
  double best_eer = 2.0;
  for (const Candidate& c : candidates) {
    const ConfidenceModel init =
        make_model(kind, c.state_dim, c.hidden_dim, opt.seed);
    const TrainResult r = train(init, corpus, cfg);
    if (candidates.size() == 1) {
      best = r;
      break;
    }
    const double dev_eer = dev_eer_of(r.model, dev, arc_set);
    std::printf("candidate D=%d H=%d dev EER %.4f\n", c.state_dim,
                c.hidden_dim, dev_eer);
    if (dev_eer < best_eer) {
      best_eer = dev_eer;
      best = r;
    }
  }
  if (candidates.size() > 1) {
    std::printf("selected D=%d H=%d dev EER %.4f\n", best.model.state_dim,
                best.model.hidden_dim, best_eer);
  }

  util::write_text_file(opt.out_path, serialize_model(best.model));
  manifest.write_beside(opt.out_path);
  std::printf("trained %s on %zu utterances, final loss %.6f\n",
              opt.kind.c_str(), corpus.size(),
              best.loss_curve.empty() ? 0.0 : best.loss_curve.back());
  return 0;
}

struct ScoreOptions {
  std::string hwcn_dir;
  std::string model_path;
  std::string out_dir;
  std::string refs_path;    // optional, enables --scores-out
  std::string scores_out;   // optional labeled score TSV
  std::string split = "all";
  double acoustic_scale = kDefaultAcousticScale;
  std::string arc_set = "all";
  int workers = cli::default_workers();
};

int cmd_score(const ScoreOptions& opt) {
  Manifest manifest("score");
  manifest.input("hwcns", opt.hwcn_dir);
  manifest.input("model", opt.model_path);
  manifest.output("scored", opt.out_dir);
  manifest.flag("split", opt.split);
  manifest.flag("acoustic-scale", opt.acoustic_scale);
  manifest.flag("arc-set", opt.arc_set);
  manifest.flag("workers", opt.workers);
  if (!opt.refs_path.empty()) manifest.input("refs", opt.refs_path);
  if (!opt.scores_out.empty()) manifest.output("scores", opt.scores_out);

  const ConfidenceModel model =
      parse_model(util::read_text_file(opt.model_path));
  const auto files = cli::corpus_files(opt.hwcn_dir, ".hwcn", opt.split);
  fs::create_directories(opt.out_dir);

  WordsById refs;
  const bool want_scores = !opt.scores_out.empty();
  if (want_scores) {
    if (opt.refs_path.empty()) {
      throw ContractError("--scores-out requires --refs for labels");
    }
    refs = parse_refs(util::read_text_file(opt.refs_path));
  }
  const ArcSet arc_set =
      opt.arc_set == "competing" ? ArcSet::kCompeting : ArcSet::kAll;

  std::vector<std::vector<ScoreRecord>> per_file_scores(files.size());
  cli::parallel_for(files.size(), opt.workers, [&](size_t i) {
    Hwcn h = parse_hwcn(
        util::read_text_file((fs::path(opt.hwcn_dir) / files[i]).string()));
    recompute_onebest(h, opt.acoustic_scale);
    Hwcn scored = score_arcs(model, h);
    if (want_scores) {
      const auto it = refs.find(scored.utterance_id);
      if (it == refs.end()) {
        throw ContractError("no reference for utterance " +
                            scored.utterance_id);
      }
      const Hwcn labeled = label_arcs(scored, it->second);
      // The TSV dump keeps per-arc ids next to the scores, so build it
      // directly instead of going through collect_arc_scores.
      const HwcnIndex idx = HwcnIndex::build(labeled);
      std::set<std::pair<int, int>> competing_slots;
      if (arc_set == ArcSet::kCompeting) {
        for (int arc_id : labeled.onebest_arc_ids) {
          const HwcnArc& a = labeled.arcs[idx.arc_pos.at(arc_id)];
          competing_slots.insert({a.start_node, a.end_node});
        }
      }
      for (const HwcnArc& a : labeled.arcs) {
        if (arc_set == ArcSet::kCompeting &&
            !competing_slots.count({a.start_node, a.end_node})) {
          continue;
        }
        per_file_scores[i].push_back(
            {labeled.utterance_id, a.id, *a.confidence, *a.label});
      }
      scored = labeled;  // persist labels too
    }
    const std::string out_name =
        cli::utterance_of_filename(files[i]) + ".hwcn";
    util::write_text_file((fs::path(opt.out_dir) / out_name).string(),
                          serialize_hwcn(scored));
  });

  if (want_scores) {
    std::vector<ScoreRecord> all;
    for (const auto& records : per_file_scores) {
      all.insert(all.end(), records.begin(), records.end());
    }
    util::write_text_file(opt.scores_out, serialize_scores(all));
  }
  manifest.write_beside(opt.out_dir);
  std::printf("scored %zu networks into %s\n", files.size(),
              opt.out_dir.c_str());
  return 0;
}

struct DecodeOptions {
  std::string hwcn_dir;
  std::string mode = "maxmean";
  std::string out_path;
  std::string split = "all";
  double acoustic_scale = kDefaultAcousticScale;
  int workers = cli::default_workers();
};

int cmd_decode(const DecodeOptions& opt) {
  Manifest manifest("decode");
  manifest.input("hwcns", opt.hwcn_dir);
  manifest.output("hyp", opt.out_path);
  manifest.flag("mode", opt.mode);
  manifest.flag("split", opt.split);
  manifest.flag("acoustic-scale", opt.acoustic_scale);
  manifest.flag("workers", opt.workers);
  if (opt.mode != "map" && opt.mode != "maxmean") {
    throw ContractError("mode must be map or maxmean");
  }

  const auto files = cli::corpus_files(opt.hwcn_dir, ".hwcn", opt.split);
  std::vector<std::string> lines(files.size());
  cli::parallel_for(files.size(), opt.workers, [&](size_t i) {
    const Hwcn h = parse_hwcn(
        util::read_text_file((fs::path(opt.hwcn_dir) / files[i]).string()));
    const DecodeResult r = opt.mode == "map"
                               ? map_onebest(h, opt.acoustic_scale)
                               : decode_max_mean(h);
    lines[i] = format_decode_line(h.utterance_id, r) + "\n";
  });
  std::string out;
  for (const std::string& line : lines) out += line;
  util::write_text_file(opt.out_path, out);
  manifest.write_beside(opt.out_path);
  std::printf("decoded %zu utterances (%s) into %s\n", files.size(),
              opt.mode.c_str(), opt.out_path.c_str());
  return 0;
}

struct CalibrateOptions {
  std::string hwcn_dir;
  std::string refs_path;
  std::string out_path;   // calibrator file (fit mode) or out dir (apply)
  std::string apply_path; // calibrator to apply; empty means fit
  double smoothing_scale = kDefaultSmoothingScale;
  std::string eval_mode = "exact";
  int grid_points = 4096;
  std::string split = "dev";
  std::string arc_set = "all";
  double acoustic_scale = kDefaultAcousticScale;
  int workers = cli::default_workers();
};

int cmd_calibrate(const CalibrateOptions& opt) {
  const bool apply = !opt.apply_path.empty();
  Manifest manifest("calibrate");
  manifest.input("hwcns", opt.hwcn_dir);
  manifest.flag("eval-mode", opt.eval_mode);
  manifest.flag("workers", opt.workers);
  const CalibratorEvalMode mode = opt.eval_mode == "grid"
                                      ? CalibratorEvalMode::kGrid
                                      : CalibratorEvalMode::kExact;

  if (apply) {
    manifest.input("calibrator", opt.apply_path);
    manifest.output("calibrated", opt.out_path);
    Calibrator c = Calibrator::parse(util::read_text_file(opt.apply_path));
    c.set_eval_mode(mode);
    const auto files = cli::corpus_files(opt.hwcn_dir, ".hwcn", "all");
    fs::create_directories(opt.out_path);
    cli::parallel_for(files.size(), opt.workers, [&](size_t i) {
      const Hwcn h = parse_hwcn(
          util::read_text_file((fs::path(opt.hwcn_dir) / files[i]).string()));
      util::write_text_file((fs::path(opt.out_path) / files[i]).string(),
                            serialize_hwcn(c.calibrate_hwcn(h)));
    });
    manifest.write_beside(opt.out_path);
    std::printf("calibrated %zu networks into %s\n", files.size(),
                opt.out_path.c_str());
    return 0;
  }

  manifest.input("refs", opt.refs_path);
  manifest.output("calibrator", opt.out_path);
  manifest.flag("smoothing-scale", opt.smoothing_scale);
  manifest.flag("grid-points", opt.grid_points);
  manifest.flag("split", opt.split);
  manifest.flag("arc-set", opt.arc_set);
  manifest.flag("acoustic-scale", opt.acoustic_scale);

  const ArcSet arc_set =
      opt.arc_set == "competing" ? ArcSet::kCompeting : ArcSet::kAll;
  const std::vector<Hwcn> labeled =
      load_labeled(opt.hwcn_dir, opt.refs_path, opt.split, opt.acoustic_scale);
  std::vector<ScoredLabel> scores;
  for (const Hwcn& h : labeled) {
    const auto s = collect_arc_scores(h, arc_set);
    scores.insert(scores.end(), s.begin(), s.end());
  }
  const Calibrator c =
      Calibrator::fit(scores, opt.smoothing_scale, mode, opt.grid_points);
  util::write_text_file(opt.out_path, c.serialize());
  manifest.write_beside(opt.out_path);
  std::printf("fitted calibrator on %zu scores (%d correct, %d wrong)\n",
              scores.size(), c.n_correct(), c.n_wrong());
  return 0;
}

struct EvalOptions {
  std::string hyp_path;
  std::string refs_path;
  std::string scores_path;  // optional
  std::string out_path;
  std::string det_out;
  bool tsv = false;
};

int cmd_eval(const EvalOptions& opt) {
  Manifest manifest("eval");
  manifest.input("hyp", opt.hyp_path);
  manifest.input("refs", opt.refs_path);
  manifest.output("report", opt.out_path);
  manifest.flag("tsv", opt.tsv ? 1 : 0);

  const auto decoded = parse_decode_file(util::read_text_file(opt.hyp_path));
  const WordsById all_refs = parse_refs(util::read_text_file(opt.refs_path));
  WordsById hyps;
  std::vector<std::string> utterances;
  for (const DecodedUtterance& d : decoded) {
    hyps[d.utterance_id] = d.words;
    utterances.push_back(d.utterance_id);
  }
  const WordsById refs = cli::subset_refs(all_refs, utterances);
  const WerReport w = wer(hyps, refs);

  std::string report = format_wer_report(w, opt.tsv);
  if (!opt.scores_path.empty()) {
    manifest.input("scores", opt.scores_path);
    const auto records = parse_scores(util::read_text_file(opt.scores_path));
    std::vector<ScoredLabel> scores;
    for (const ScoreRecord& r : records) scores.push_back({r.score, r.label});
    const DetectionReport d = det_curve(scores);
    char buf[160];
    if (opt.tsv) {
      std::snprintf(buf, sizeof(buf), "eer\t%.6f\teer_threshold\t%.6f\nnce\t%.6f\n",
                    d.eer, d.eer_threshold, d.nce);
    } else {
      std::snprintf(buf, sizeof(buf),
                    "EER %.2f%%  (threshold %.4f)\nNCE %.4f\n", 100.0 * d.eer,
                    d.eer_threshold, d.nce);
    }
    report += buf;
    if (!opt.det_out.empty()) {
      manifest.output("det", opt.det_out);
      std::string det;
      for (const auto& pt : d.det_points) {
        det += util::format_fixed6(pt.threshold) + "\t" +
               util::format_fixed6(pt.p_miss) + "\t" +
               util::format_fixed6(pt.p_false_alarm) + "\n";
      }
      util::write_text_file(opt.det_out, det);
    }
  }
  util::write_text_file(opt.out_path, report);
  manifest.write_beside(opt.out_path);
  std::fputs(report.c_str(), stdout);
  return 0;
}

struct CombineOptions {
  std::vector<std::string> hyp_paths;
  std::string refs_path;
  std::string mode = "raw";
  std::string out_path;
};

int cmd_combine(const CombineOptions& opt) {
  Manifest manifest("combine");
  for (size_t i = 0; i < opt.hyp_paths.size(); ++i) {
    manifest.input("hyp" + std::to_string(i), opt.hyp_paths[i]);
  }
  manifest.input("refs", opt.refs_path);
  manifest.output("report", opt.out_path);
  manifest.flag("mode", opt.mode);
  if (opt.mode != "raw" && opt.mode != "calibrated") {
    throw ContractError("mode must be raw or calibrated");
  }

  std::vector<DecodedCorpus> systems;
  std::vector<std::string> utterances;
  for (const std::string& path : opt.hyp_paths) {
    DecodedCorpus corpus;
    for (const DecodedUtterance& d :
         parse_decode_file(util::read_text_file(path))) {
      corpus[d.utterance_id] = d;
    }
    if (!systems.empty() && corpus.size() != systems[0].size()) {
      throw ContractError("utterance id sets differ across hypothesis files");
    }
    systems.push_back(std::move(corpus));
  }
  for (const auto& [utt, d] : systems[0]) utterances.push_back(utt);
  const WordsById refs = cli::subset_refs(
      parse_refs(util::read_text_file(opt.refs_path)), utterances);

  const CombineMode mode =
      opt.mode == "raw" ? CombineMode::kRaw : CombineMode::kCalibrated;
  const CombinationReport report =
      run_combination_experiment(systems, refs, mode);
  util::write_text_file(opt.out_path, format_combination_report(report));
  util::write_text_file(opt.out_path + ".tsv",
                        format_combination_report(report, true));
  manifest.write_beside(opt.out_path);
  std::fputs(format_combination_report(report).c_str(), stdout);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"word-lattice confidence toolkit"};
  app.require_subcommand(0, 1);
  bool show_version = false;
  app.add_flag("--version", show_version, "print tool and format versions");

  GenOptions gen;
  CLI::App* gen_cmd = app.add_subcommand("gen", "generate a synthetic corpus");
  gen_cmd->add_option("--config", gen.config_path, "key=value config file")
      ->required();
  gen_cmd->add_option("--out", gen.out_dir, "output corpus directory")
      ->required();

  HwcnOptions hwcn;
  CLI::App* hwcn_cmd =
      app.add_subcommand("hwcn", "build confusion networks from lattices");
  hwcn_cmd->add_option("--lattices", hwcn.lattice_dir, "lattice directory")
      ->required();
  hwcn_cmd->add_option("--out", hwcn.out_dir, "output directory")->required();
  hwcn_cmd->add_option("--tolerance-frames", hwcn.tolerance_frames,
                       "node merge tolerance in frames");
  hwcn_cmd->add_option("--acoustic-scale", hwcn.acoustic_scale,
                       "acoustic score scale");
  hwcn_cmd->add_option("--split", hwcn.split, "train|dev|eval|all");
  hwcn_cmd->add_option("--workers", hwcn.workers, "worker pool size");

  TrainOptions train_opt;
  CLI::App* train_cmd =
      app.add_subcommand("train", "train a confidence model");
  train_cmd->add_option("--hwcns", train_opt.hwcn_dir, "network directory")
      ->required();
  train_cmd->add_option("--refs", train_opt.refs_path, "reference TSV")
      ->required();
  train_cmd->add_option("--out", train_opt.out_path, "output model file")
      ->required();
  train_cmd->add_option("--model-kind", train_opt.kind,
                        "logistic|lattice_rnn");
  train_cmd->add_option("--split", train_opt.split, "training split");
  train_cmd->add_option("--dev-split", train_opt.dev_split,
                        "split used for grid selection");
  train_cmd->add_flag("--grid", train_opt.grid,
                      "sweep the hyperparameter grid, select by dev EER");
  train_cmd->add_option("--grid-state-dims", train_opt.grid_state_dims,
                        "comma list of state dims for --grid");
  train_cmd->add_option("--grid-hidden-dims", train_opt.grid_hidden_dims,
                        "comma list of hidden dims for --grid");
  train_cmd->add_option("--state-dim", train_opt.state_dim, "state width");
  train_cmd->add_option("--hidden-dim", train_opt.hidden_dim, "hidden width");
  train_cmd->add_option("--learning-rate", train_opt.learning_rate, "step");
  train_cmd->add_option("--epochs", train_opt.epochs, "epochs");
  train_cmd->add_option("--batch-size", train_opt.batch_size,
                        "utterances per batch");
  train_cmd->add_option("--l2", train_opt.l2, "l2 penalty");
  train_cmd->add_option("--seed", train_opt.seed, "parameter init seed");
  train_cmd->add_option("--acoustic-scale", train_opt.acoustic_scale,
                        "scale for 1-best recomputation");
  train_cmd->add_option("--arc-set", train_opt.arc_set,
                        "all|competing (dev EER arc set)");

  ScoreOptions score;
  CLI::App* score_cmd =
      app.add_subcommand("score", "fill per-arc confidences with a model");
  score_cmd->add_option("--hwcns", score.hwcn_dir, "network directory")
      ->required();
  score_cmd->add_option("--model", score.model_path, "model file")->required();
  score_cmd->add_option("--out", score.out_dir, "output directory")
      ->required();
  score_cmd->add_option("--refs", score.refs_path,
                        "reference TSV (labels for --scores-out)");
  score_cmd->add_option("--scores-out", score.scores_out,
                        "labeled score TSV output");
  score_cmd->add_option("--split", score.split, "train|dev|eval|all");
  score_cmd->add_option("--acoustic-scale", score.acoustic_scale,
                        "scale for 1-best recomputation");
  score_cmd->add_option("--arc-set", score.arc_set, "all|competing");
  score_cmd->add_option("--workers", score.workers, "worker pool size");

  DecodeOptions decode;
  CLI::App* decode_cmd = app.add_subcommand("decode", "decode hypotheses");
  decode_cmd->add_option("--hwcns", decode.hwcn_dir, "network directory")
      ->required();
  decode_cmd->add_option("--mode", decode.mode, "map|maxmean");
  decode_cmd->add_option("--out", decode.out_path, "hypothesis file")
      ->required();
  decode_cmd->add_option("--split", decode.split, "train|dev|eval|all");
  decode_cmd->add_option("--acoustic-scale", decode.acoustic_scale,
                         "acoustic scale for map mode");
  decode_cmd->add_option("--workers", decode.workers, "worker pool size");

  CalibrateOptions cal;
  CLI::App* cal_cmd = app.add_subcommand(
      "calibrate", "fit a score calibrator or apply one");
  cal_cmd->add_option("--hwcns", cal.hwcn_dir, "scored network directory")
      ->required();
  cal_cmd->add_option("--refs", cal.refs_path, "reference TSV (fit mode)");
  cal_cmd->add_option("--out", cal.out_path,
                      "calibrator file (fit) or output directory (apply)")
      ->required();
  cal_cmd->add_option("--apply", cal.apply_path,
                      "calibrator file to apply instead of fitting");
  cal_cmd->add_option("--smoothing-scale", cal.smoothing_scale,
                      "sigmoid smoothing scale L");
  cal_cmd->add_option("--eval-mode", cal.eval_mode, "exact|grid");
  cal_cmd->add_option("--grid-points", cal.grid_points, "grid resolution");
  cal_cmd->add_option("--split", cal.split, "fit split");
  cal_cmd->add_option("--arc-set", cal.arc_set, "all|competing");
  cal_cmd->add_option("--acoustic-scale", cal.acoustic_scale,
                      "scale for 1-best recomputation");
  cal_cmd->add_option("--workers", cal.workers, "worker pool size");

  EvalOptions eval;
  CLI::App* eval_cmd = app.add_subcommand("eval", "evaluate hypotheses");
  eval_cmd->add_option("--hyp", eval.hyp_path, "hypothesis file")->required();
  eval_cmd->add_option("--refs", eval.refs_path, "reference TSV")->required();
  eval_cmd->add_option("--scores", eval.scores_path,
                       "labeled score TSV for EER/NCE");
  eval_cmd->add_option("--out", eval.out_path, "report file")->required();
  eval_cmd->add_option("--det-out", eval.det_out, "DET curve TSV output");
  eval_cmd->add_flag("--tsv", eval.tsv, "emit TSV instead of a table");

  CombineOptions comb;
  CLI::App* comb_cmd =
      app.add_subcommand("combine", "multi-recognizer combination experiment");
  comb_cmd->add_option("--hyp", comb.hyp_paths,
                       "hypothesis file, one per recognizer (repeat)")
      ->required();
  comb_cmd->add_option("--refs", comb.refs_path, "reference TSV")->required();
  comb_cmd->add_option("--mode", comb.mode, "raw|calibrated");
  comb_cmd->add_option("--out", comb.out_path, "report file")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (show_version) {
      std::printf("latconf %s (formats: lattice=%d hwcn=%d model=%d "
                  "calibrator=%d)\n",
                  kToolVersion, kLatticeFormatVersion, kHwcnFormatVersion,
                  kModelFormatVersion, kCalibratorFormatVersion);
      return 0;
    }
    if (gen_cmd->parsed()) return cmd_gen(gen);
    if (hwcn_cmd->parsed()) return cmd_hwcn(hwcn);
    if (train_cmd->parsed()) return cmd_train(train_opt);
    if (score_cmd->parsed()) return cmd_score(score);
    if (decode_cmd->parsed()) return cmd_decode(decode);
    if (cal_cmd->parsed()) return cmd_calibrate(cal);
    if (eval_cmd->parsed()) return cmd_eval(eval);
    if (comb_cmd->parsed()) return cmd_combine(comb);
    std::fputs(app.help().c_str(), stdout);
    return 1;
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
