#pragma once

#include <string>
#include <vector>

#include "latconf/hwcn.hpp"

namespace latconf {

inline constexpr double kDefaultSmoothingScale = 1.8;

enum class CalibratorEvalMode { kExact, kGrid };

// Maps raw confidence scores to probabilities of correctness by Bayes
// inversion of sigmoid-smoothed empirical class-conditional CDFs. The
// per-class densities are logistic-kernel estimates (bandwidth 1/L) centered
// at the stored training scores. The transformation is deliberately not
// constrained to be monotone.
class Calibrator {
 public:
  // Requires at least one sample of each class; throws FitError otherwise.
  static Calibrator fit(const std::vector<std::pair<double, int>>& scored,
                        double smoothing_scale = kDefaultSmoothingScale,
                        CalibratorEvalMode mode = CalibratorEvalMode::kExact,
                        int grid_points = 4096);

  // p(y | correct): logistic-kernel density over the positive scores.
  double density_correct(double y) const;
  // p(y | wrong): same estimate over the negative scores.
  double density_wrong(double y) const;

  // P(correct | y). Falls back to the prior P(correct) when both densities
  // underflow to zero.
  double calibrate(double y) const;

  // Applies calibrate to every arc confidence; structure untouched.
  Hwcn calibrate_hwcn(const Hwcn& h) const;

  double prior_correct() const {
    return static_cast<double>(n_correct()) / (n_correct() + n_wrong());
  }
  int n_correct() const { return static_cast<int>(positive_scores_.size()); }
  int n_wrong() const { return static_cast<int>(negative_scores_.size()); }
  double smoothing_scale() const { return smoothing_scale_; }
  CalibratorEvalMode eval_mode() const { return eval_mode_; }
  void set_eval_mode(CalibratorEvalMode mode);
  const std::vector<double>& positive_scores() const {
    return positive_scores_;
  }
  const std::vector<double>& negative_scores() const {
    return negative_scores_;
  }

  std::string serialize() const;
  static Calibrator parse(const std::string& text);

 private:
  Calibrator() = default;
  void build_grid();
  double density_exact(const std::vector<double>& centers, double y) const;
  double density_on_grid(const std::vector<double>& values, double y) const;

  std::vector<double> positive_scores_;  // sorted
  std::vector<double> negative_scores_;  // sorted
  double smoothing_scale_ = kDefaultSmoothingScale;
  CalibratorEvalMode eval_mode_ = CalibratorEvalMode::kExact;
  int grid_points_ = 4096;

  // Precomputed densities on a uniform grid spanning
  // [min score - 5/L, max score + 5/L]; linear interpolation in between,
  // clamped at the ends.
  double grid_lo_ = 0.0;
  double grid_step_ = 0.0;
  std::vector<double> grid_correct_;
  std::vector<double> grid_wrong_;
};

// Score file rows: (utterance_id, arc index, score, 0/1 label).
struct ScoreRecord {
  std::string utterance_id;
  int arc_index = 0;
  double score = 0.0;
  int label = 0;
};

std::string serialize_scores(const std::vector<ScoreRecord>& records);
std::vector<ScoreRecord> parse_scores(const std::string& text);

}  // namespace latconf
