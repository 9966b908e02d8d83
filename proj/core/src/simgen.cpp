#include "latconf/simgen.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "latconf/error.hpp"
#include "latconf/util.hpp"

namespace latconf {

using util::Rng;

namespace {

constexpr const char* kSyllables[] = {
    "ba", "ko", "mi", "ta", "ren", "su", "lo", "dai", "fe", "nu",
    "ga", "pi", "vor", "ze", "hu", "cha", "len", "do", "sa", "ki"};
constexpr int kSyllableCount = 20;

std::string make_word(int index) {
  std::string w = kSyllables[(index / kSyllableCount) % kSyllableCount];
  w += kSyllables[index % kSyllableCount];
  if (index >= kSyllableCount * kSyllableCount) {
    w += kSyllables[(index / (kSyllableCount * kSyllableCount)) %
                    kSyllableCount];
  }
  return w;
}

void validate_config(const SimConfig& cfg) {
  if (cfg.utterance_count < 1) throw ContractError("utterance_count < 1");
  if (cfg.vocabulary_size < 10) throw ContractError("vocabulary_size < 10");
  if (cfg.vocabulary_size > kSyllableCount * kSyllableCount * kSyllableCount) {
    throw ContractError("vocabulary_size too large");
  }
  if (cfg.words_min < 1 || cfg.words_max < cfg.words_min) {
    throw ContractError("invalid words_per_utterance range");
  }
  if (cfg.recognizers.empty()) throw ContractError("no recognizer profiles");
  for (const RecognizerProfile& p : cfg.recognizers) {
    if (p.substitution_rate < 0.0 || p.substitution_rate >= 1.0 ||
        p.deletion_rate < 0.0 || p.deletion_rate >= 1.0 ||
        p.insertion_rate < 0.0 || p.insertion_rate >= 1.0) {
      throw ContractError("error rates must lie in [0, 1)");
    }
    if (p.substitution_rate * 2.0 + p.deletion_rate > 0.95) {
      throw ContractError("substitution and deletion rates too large");
    }
    if (p.confusion_pool_size < 1) throw ContractError("confusion_pool_size < 1");
    if (p.time_jitter_frames < 0) throw ContractError("time_jitter_frames < 0");
    if (p.acoustic_separation < 0.0) throw ContractError("acoustic_separation < 0");
    if (p.lm_noise < 0.0) throw ContractError("lm_noise < 0");
  }
}

// A word is systematically error-prone for a given recognizer; this is what
// makes recognizer mistakes learnable and decorrelates errors across
// recognizers.
bool is_hard_word(int word_index, int recognizer, uint64_t seed) {
  const uint64_t h = util::hash_combine(
      seed, util::hash_combine(0x68617264ull,  // "hard"
                               util::hash_combine(word_index, recognizer)));
  return h % 100 < 30;
}

double effective_sub_rate(const RecognizerProfile& p, int word_index,
                          int recognizer, uint64_t seed) {
  const double factor =
      is_hard_word(word_index, recognizer, seed) ? 2.0 : 4.0 / 7.0;
  return std::min(0.45, p.substitution_rate * factor);
}

// Fixed confusion pool of a (word, recognizer) pair: the same wrong words
// recur, so mistakes are systematic.
std::vector<int> confusion_pool(int word_index, int recognizer, int pool_size,
                                int vocab_size, uint64_t seed) {
  std::vector<int> pool;
  uint64_t h = util::hash_combine(
      seed, util::hash_combine(0x706f6f6cull,  // "pool"
                               util::hash_combine(word_index, recognizer)));
  int guard = 0;
  while (static_cast<int>(pool.size()) < pool_size && guard < pool_size * 8) {
    h = util::mix64(h);
    const int cand = static_cast<int>(h % static_cast<uint64_t>(vocab_size));
    ++guard;
    if (cand == word_index) continue;
    if (std::find(pool.begin(), pool.end(), cand) != pool.end()) continue;
    pool.push_back(cand);
  }
  return pool;
}

enum class SlotKind { kCorrect, kSubstituted, kDeleted, kInserted };

struct SlotPlan {
  SlotKind kind;
  int backbone_word = -1;   // -1 encodes silence
  int true_word = -1;       // reference word the slot covers, -1 for inserted
  std::vector<int> alternatives;  // distinct, excludes backbone word
  bool add_silence_alt = false;
  int duration = 20;
};

struct LatticeBuilder {
  Lattice l;
  int next_node = 0;
  int next_arc = 0;

  int add_node(int time) {
    l.nodes.push_back({next_node, time});
    return next_node++;
  }
  void add_arc(int s, int e, const std::string& word, double acoustic,
               double trans) {
    Arc a;
    a.id = next_arc++;
    a.start_node = s;
    a.end_node = e;
    a.word = word;
    a.acoustic_logp = acoustic;
    a.trans_logp = trans;
    l.arcs.push_back(std::move(a));
  }
};

}  // namespace

GeneratedCorpus generate_corpus(const SimConfig& cfg) {
  validate_config(cfg);

  std::vector<std::string> vocab(cfg.vocabulary_size);
  for (int i = 0; i < cfg.vocabulary_size; ++i) vocab[i] = make_word(i);

  GeneratedCorpus corpus;
  corpus.lattices.resize(cfg.recognizers.size());
  corpus.oracle_correct_prob.resize(cfg.recognizers.size());

  const Rng master(cfg.seed);
  for (int u = 0; u < cfg.utterance_count; ++u) {
    char utt_buf[32];
    std::snprintf(utt_buf, sizeof(utt_buf), "utt_%06d", u);
    const std::string utt(utt_buf);

    Rng ref_rng = master.fork(util::hash_combine(0x726566ull, u));  // "ref"
    const int n_words = ref_rng.uniform_int(cfg.words_min, cfg.words_max);
    std::vector<int> ref_ids(n_words);
    std::vector<std::string> ref_words(n_words);
    for (int w = 0; w < n_words; ++w) {
      ref_ids[w] = ref_rng.uniform_int(0, cfg.vocabulary_size - 1);
      ref_words[w] = vocab[ref_ids[w]];
    }
    corpus.refs[utt] = ref_words;

    for (size_t r = 0; r < cfg.recognizers.size(); ++r) {
      const RecognizerProfile& prof = cfg.recognizers[r];
      Rng rng = master.fork(util::hash_combine(u + 1, r + 1));

      // Corrupt the reference into the recognizer's transcription and plan
      // one slot per emitted token.
      std::vector<SlotPlan> slots;
      double oracle_p = 1.0;
      for (int w = 0; w < n_words; ++w) {
        const double s_eff =
            effective_sub_rate(prof, ref_ids[w], static_cast<int>(r), cfg.seed);
        oracle_p *= std::max(0.0, 1.0 - s_eff - prof.deletion_rate);
        const auto pool =
            confusion_pool(ref_ids[w], static_cast<int>(r),
                           prof.confusion_pool_size, cfg.vocabulary_size,
                           cfg.seed);
        SlotPlan slot;
        slot.true_word = ref_ids[w];
        slot.duration = rng.uniform_int(15, 40);
        const double draw = rng.uniform();
        if (draw < s_eff && !pool.empty()) {
          slot.kind = SlotKind::kSubstituted;
          slot.backbone_word = pool[rng.uniform_int(
              0, static_cast<int>(pool.size()) - 1)];
        } else if (draw < s_eff + prof.deletion_rate) {
          slot.kind = SlotKind::kDeleted;
          slot.backbone_word = -1;  // silence
        } else {
          slot.kind = SlotKind::kCorrect;
          slot.backbone_word = ref_ids[w];
        }
        // Alternatives: the true word survives in the lattice whenever the
        // backbone got it wrong, plus systematic confusables.
        if (slot.kind != SlotKind::kCorrect) slot.alternatives.push_back(ref_ids[w]);
        for (int cand : pool) {
          if (static_cast<int>(slot.alternatives.size()) >=
              prof.confusion_pool_size) {
            break;
          }
          if (cand == slot.backbone_word) continue;
          if (std::find(slot.alternatives.begin(), slot.alternatives.end(),
                        cand) != slot.alternatives.end()) {
            continue;
          }
          slot.alternatives.push_back(cand);
        }
        slots.push_back(std::move(slot));

        oracle_p *= 1.0 - prof.insertion_rate;
        if (rng.uniform() < prof.insertion_rate) {
          SlotPlan ins;
          ins.kind = SlotKind::kInserted;
          ins.backbone_word = rng.uniform_int(0, cfg.vocabulary_size - 1);
          ins.duration = rng.uniform_int(15, 40);
          ins.add_silence_alt = true;
          const auto ins_pool =
              confusion_pool(ins.backbone_word, static_cast<int>(r),
                             prof.confusion_pool_size, cfg.vocabulary_size,
                             cfg.seed);
          for (int cand : ins_pool) {
            if (static_cast<int>(ins.alternatives.size()) >= 2) break;
            if (cand != ins.backbone_word) ins.alternatives.push_back(cand);
          }
          slots.push_back(std::move(ins));
        }
      }

      // Lay the backbone down, then attach alternatives. Backbone arcs keep
      // the strictly best acoustic and transitional score of their slot, so
      // the MAP path is the backbone for any positive acoustic scale.
      LatticeBuilder b;
      b.l.utterance_id = utt;
      b.l.frame_ms = 10;
      std::vector<int> backbone_nodes;
      std::vector<int> times;
      int t = 0;
      backbone_nodes.push_back(b.add_node(t));
      times.push_back(t);
      for (const SlotPlan& slot : slots) {
        t += slot.duration;
        backbone_nodes.push_back(b.add_node(t));
        times.push_back(t);
      }
      b.l.source_node_id = backbone_nodes.front();
      b.l.sink_node_id = backbone_nodes.back();

      std::vector<double> backbone_acoustic(slots.size());
      for (size_t s = 0; s < slots.size(); ++s) {
        backbone_acoustic[s] =
            -0.10 * slots[s].duration + rng.gaussian(0.0, 0.15);
      }

      for (size_t s = 0; s < slots.size(); ++s) {
        const SlotPlan& slot = slots[s];
        const int start = backbone_nodes[s];
        const int end = backbone_nodes[s + 1];

        struct AltPlan {
          int word;            // -1 for silence
          bool split = false;  // two-arc variant through a middle node
          bool span_two = false;
        };
        std::vector<AltPlan> alts;
        for (int w : slot.alternatives) alts.push_back({w, false, false});
        if (slot.add_silence_alt) alts.push_back({-1, false, false});
        if (prof.time_jitter_frames > 0 && !slot.alternatives.empty() &&
            rng.uniform() < 0.30) {
          // Extra split variant that duplicates one alternative's word; once
          // node merging pulls the middle node into a backbone cluster, the
          // duplicate becomes a genuine competing arc.
          const int w = slot.alternatives[rng.uniform_int(
              0, static_cast<int>(slot.alternatives.size()) - 1)];
          alts.push_back({w, true, false});
        }
        if (s + 1 < slots.size() && !slot.alternatives.empty() &&
            rng.uniform() < 0.15) {
          const int w = slot.alternatives[rng.uniform_int(
              0, static_cast<int>(slot.alternatives.size()) - 1)];
          alts.push_back({w, false, true});
        }

        // Transitional shares of the arcs leaving `start`: the backbone
        // keeps 0.55..0.75, two-slot variants get a capped sliver, the rest
        // is split by lm-noise weights.
        const double q = rng.uniform(0.55, 0.75);
        double remaining = 1.0 - q;
        std::vector<double> weights(alts.size());
        double weight_sum = 0.0;
        double span_share = 0.0;
        for (size_t a = 0; a < alts.size(); ++a) {
          weights[a] = std::exp(prof.lm_noise * rng.gaussian());
          if (!alts[a].span_two) weight_sum += weights[a];
        }
        for (size_t a = 0; a < alts.size(); ++a) {
          if (alts[a].span_two) {
            span_share = 0.2 * remaining;  // < q^2 for every q in range
          }
        }
        const double single_total = remaining - span_share;

        for (size_t a = 0; a < alts.size(); ++a) {
          const AltPlan& alt = alts[a];
          const bool correct_word = alt.word == slot.true_word && alt.word >= 0;
          const double gap_mean =
              0.9 + (correct_word ? -0.45 : 0.45) * prof.acoustic_separation;
          const double gap = std::max(0.05, rng.gaussian(gap_mean, 0.35));
          const std::string word =
              alt.word < 0 ? kSilenceWord : vocab[alt.word];
          if (alt.span_two) {
            const double acoustic =
                backbone_acoustic[s] + backbone_acoustic[s + 1] -
                std::max(0.3, rng.gaussian(1.5, 0.4));
            b.add_arc(start, backbone_nodes[s + 2], word, acoustic,
                      std::log(span_share));
          } else if (alt.split) {
            const int jitter = rng.uniform_int(-prof.time_jitter_frames,
                                               prof.time_jitter_frames);
            const int mid_time =
                std::clamp(times[s] + slot.duration / 2 + jitter, times[s] + 1,
                           times[s + 1] - 1);
            const int mid = b.add_node(mid_time);
            const double total = backbone_acoustic[s] - gap;
            const double frac = rng.uniform(0.4, 0.8);
            const double share =
                single_total * weights[a] / weight_sum;
            b.add_arc(start, mid, word, total * frac, std::log(share));
            b.add_arc(mid, end, kSilenceWord, total * (1.0 - frac), 0.0);
          } else {
            const double share = single_total * weights[a] / weight_sum;
            b.add_arc(start, end, word, backbone_acoustic[s] - gap,
                      std::log(share));
          }
        }

        const std::string backbone_word =
            slot.backbone_word < 0 ? kSilenceWord : vocab[slot.backbone_word];
        b.add_arc(start, end, backbone_word, backbone_acoustic[s],
                  std::log(q));
      }

      validate_lattice(b.l);
      corpus.lattices[r][utt] = std::move(b.l);
      corpus.oracle_correct_prob[r][utt] = oracle_p;
    }
  }
  return corpus;
}

Split split_of(const std::string& utterance_id) {
  const uint64_t h = util::mix64(util::fnv1a64(utterance_id));
  const uint64_t bucket = h % 10;
  if (bucket < 6) return Split::kTrain;
  if (bucket < 8) return Split::kDev;
  return Split::kEval;
}

const char* split_name(Split s) {
  switch (s) {
    case Split::kTrain:
      return "train";
    case Split::kDev:
      return "dev";
    case Split::kEval:
      return "eval";
  }
  return "unknown";
}

SimConfig parse_sim_config(const std::string& text) {
  SimConfig cfg;
  cfg.recognizers.clear();
  std::map<int, RecognizerProfile> recs;
  int line_no = 0;
  for (const std::string& raw : util::split(text, '\n')) {
    ++line_no;
    std::string line = raw;
    const size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    while (!line.empty() && (line.back() == ' ' || line.back() == '\t')) {
      line.pop_back();
    }
    size_t begin = 0;
    while (begin < line.size() && (line[begin] == ' ' || line[begin] == '\t')) {
      ++begin;
    }
    line = line.substr(begin);
    if (line.empty()) continue;
    const size_t eq = line.find('=');
    if (eq == std::string::npos) {
      throw ParseError("expected key=value", line_no);
    }
    const std::string key = line.substr(0, eq);
    const std::string value = line.substr(eq + 1);

    if (key == "seed") {
      cfg.seed = static_cast<uint64_t>(
          std::stoull(value));
    } else if (key == "vocabulary_size") {
      cfg.vocabulary_size = util::parse_int(value, key, line_no);
    } else if (key == "utterance_count") {
      cfg.utterance_count = util::parse_int(value, key, line_no);
    } else if (key == "words_min") {
      cfg.words_min = util::parse_int(value, key, line_no);
    } else if (key == "words_max") {
      cfg.words_max = util::parse_int(value, key, line_no);
    } else if (key.starts_with("recognizer.")) {
      const auto parts = util::split(key, '.');
      if (parts.size() != 3) throw ParseError("malformed recognizer key", line_no);
      const int index = util::parse_int(parts[1], "recognizer index", line_no);
      RecognizerProfile& p = recs[index];
      const std::string& field = parts[2];
      if (field == "substitution_rate") {
        p.substitution_rate = util::parse_double(value, field, line_no);
      } else if (field == "deletion_rate") {
        p.deletion_rate = util::parse_double(value, field, line_no);
      } else if (field == "insertion_rate") {
        p.insertion_rate = util::parse_double(value, field, line_no);
      } else if (field == "confusion_pool_size") {
        p.confusion_pool_size = util::parse_int(value, field, line_no);
      } else if (field == "time_jitter_frames") {
        p.time_jitter_frames = util::parse_int(value, field, line_no);
      } else if (field == "acoustic_separation") {
        p.acoustic_separation = util::parse_double(value, field, line_no);
      } else if (field == "lm_noise") {
        p.lm_noise = util::parse_double(value, field, line_no);
      } else {
        throw ParseError("unknown recognizer field '" + field + "'", line_no);
      }
    } else {
      throw ParseError("unknown config key '" + key + "'", line_no);
    }
  }
  for (const auto& [index, p] : recs) {
    if (index != static_cast<int>(cfg.recognizers.size())) {
      throw ParseError("recognizer indices must be contiguous from 0");
    }
    cfg.recognizers.push_back(p);
  }
  if (cfg.recognizers.empty()) cfg.recognizers.push_back({});
  return cfg;
}

std::string serialize_sim_config(const SimConfig& cfg) {
  std::string out;
  out += "seed=" + std::to_string(cfg.seed) + "\n";
  out += "vocabulary_size=" + std::to_string(cfg.vocabulary_size) + "\n";
  out += "utterance_count=" + std::to_string(cfg.utterance_count) + "\n";
  out += "words_min=" + std::to_string(cfg.words_min) + "\n";
  out += "words_max=" + std::to_string(cfg.words_max) + "\n";
  for (size_t r = 0; r < cfg.recognizers.size(); ++r) {
    const RecognizerProfile& p = cfg.recognizers[r];
    const std::string prefix = "recognizer." + std::to_string(r) + ".";
    out += prefix + "substitution_rate=" + util::format_sig9(p.substitution_rate) + "\n";
    out += prefix + "deletion_rate=" + util::format_sig9(p.deletion_rate) + "\n";
    out += prefix + "insertion_rate=" + util::format_sig9(p.insertion_rate) + "\n";
    out += prefix + "confusion_pool_size=" + std::to_string(p.confusion_pool_size) + "\n";
    out += prefix + "time_jitter_frames=" + std::to_string(p.time_jitter_frames) + "\n";
    out += prefix + "acoustic_separation=" + util::format_sig9(p.acoustic_separation) + "\n";
    out += prefix + "lm_noise=" + util::format_sig9(p.lm_noise) + "\n";
  }
  return out;
}

}  // namespace latconf
