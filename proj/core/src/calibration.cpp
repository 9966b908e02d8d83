#include "latconf/calibration.hpp"

#include <algorithm>
#include <cmath>

#include "latconf/error.hpp"
#include "latconf/util.hpp"
#include "latconf/version.hpp"

namespace latconf {

namespace {

// Logistic kernel L * e^{dL} / (1 + e^{dL})^2, evaluated through e^{-|dL|}
// so large |d| underflows to zero instead of overflowing.
double logistic_kernel(double d, double l_scale) {
  const double t = -std::abs(d * l_scale);
  const double e = std::exp(t);
  const double denom = 1.0 + e;
  return l_scale * e / (denom * denom);
}

}  // namespace

Calibrator Calibrator::fit(const std::vector<std::pair<double, int>>& scored,
                           double smoothing_scale, CalibratorEvalMode mode,
                           int grid_points) {
  if (!(smoothing_scale > 0.0)) {
    throw ContractError("smoothing scale must be positive");
  }
  if (grid_points < 2) throw ContractError("grid_points must be at least 2");
  Calibrator c;
  c.smoothing_scale_ = smoothing_scale;
  c.eval_mode_ = mode;
  c.grid_points_ = grid_points;
  for (const auto& [score, label] : scored) {
    if (!std::isfinite(score)) throw ContractError("non-finite score");
    if (label == 1) {
      c.positive_scores_.push_back(score);
    } else if (label == 0) {
      c.negative_scores_.push_back(score);
    } else {
      throw ContractError("label must be 0 or 1");
    }
  }
  if (c.positive_scores_.empty() || c.negative_scores_.empty()) {
    throw FitError("calibration requires both correct and wrong samples");
  }
  std::sort(c.positive_scores_.begin(), c.positive_scores_.end());
  std::sort(c.negative_scores_.begin(), c.negative_scores_.end());
  c.build_grid();
  return c;
}

void Calibrator::build_grid() {
  const double lo = std::min(positive_scores_.front(),
                             negative_scores_.front()) -
                    5.0 / smoothing_scale_;
  const double hi =
      std::max(positive_scores_.back(), negative_scores_.back()) +
      5.0 / smoothing_scale_;
  grid_lo_ = lo;
  grid_step_ = (hi - lo) / (grid_points_ - 1);
  grid_correct_.resize(grid_points_);
  grid_wrong_.resize(grid_points_);
  for (int i = 0; i < grid_points_; ++i) {
    const double y = lo + grid_step_ * i;
    grid_correct_[i] = density_exact(positive_scores_, y);
    grid_wrong_[i] = density_exact(negative_scores_, y);
  }
}

void Calibrator::set_eval_mode(CalibratorEvalMode mode) { eval_mode_ = mode; }

double Calibrator::density_exact(const std::vector<double>& centers,
                                 double y) const {
  double sum = 0.0;
  for (double c : centers) sum += logistic_kernel(c - y, smoothing_scale_);
  return sum / static_cast<double>(centers.size());
}

double Calibrator::density_on_grid(const std::vector<double>& values,
                                   double y) const {
  const double pos = (y - grid_lo_) / grid_step_;
  if (pos <= 0.0) return values.front();
  if (pos >= grid_points_ - 1) return values.back();
  const int i = static_cast<int>(pos);
  const double frac = pos - i;
  return values[i] * (1.0 - frac) + values[i + 1] * frac;
}

double Calibrator::density_correct(double y) const {
  return eval_mode_ == CalibratorEvalMode::kExact
             ? density_exact(positive_scores_, y)
             : density_on_grid(grid_correct_, y);
}

double Calibrator::density_wrong(double y) const {
  return eval_mode_ == CalibratorEvalMode::kExact
             ? density_exact(negative_scores_, y)
             : density_on_grid(grid_wrong_, y);
}

double Calibrator::calibrate(double y) const {
  const double p_correct = prior_correct();
  const double num = density_correct(y) * p_correct;
  const double den = num + density_wrong(y) * (1.0 - p_correct);
  // Both densities can underflow far from every sample; the prior is the
  // information-free answer there.
  if (den <= 0.0) return p_correct;
  return num / den;
}

Hwcn Calibrator::calibrate_hwcn(const Hwcn& h) const {
  Hwcn out = h;
  for (HwcnArc& a : out.arcs) {
    if (!a.confidence) {
      throw ContractError("arc " + std::to_string(a.id) +
                          " has no confidence");
    }
    a.confidence = calibrate(*a.confidence);
  }
  return out;
}

std::string Calibrator::serialize() const {
  std::string out;
  out += "LATCONF_CALIBRATOR " + std::to_string(kCalibratorFormatVersion) +
         "\n";
  out += "smoothing_scale " + util::format_sig9(smoothing_scale_) + "\n";
  out += std::string("eval_mode ") +
         (eval_mode_ == CalibratorEvalMode::kExact ? "exact" : "grid") + "\n";
  out += "grid_points " + std::to_string(grid_points_) + "\n";
  out += "n_correct " + std::to_string(n_correct()) + "\n";
  out += "n_wrong " + std::to_string(n_wrong()) + "\n";
  for (double v : positive_scores_) out += "P " + util::format_sig9(v) + "\n";
  for (double v : negative_scores_) out += "N " + util::format_sig9(v) + "\n";
  return out;
}

Calibrator Calibrator::parse(const std::string& text) {
  const auto lines = util::split(text, '\n');
  size_t i = 0;
  auto next_tokens = [&]() -> std::vector<std::string> {
    while (i < lines.size() && lines[i].empty()) ++i;
    if (i >= lines.size()) throw ParseError("truncated calibrator file");
    return util::split_whitespace(lines[i++]);
  };

  auto header = next_tokens();
  if (header.size() != 2 || header[0] != "LATCONF_CALIBRATOR") {
    throw ParseError("missing LATCONF_CALIBRATOR header");
  }
  if (util::parse_int(header[1], "format version") != kCalibratorFormatVersion) {
    throw ParseError("unsupported calibrator format version");
  }
  auto keyed = [&](const char* key) -> std::string {
    const auto tok = next_tokens();
    if (tok.size() != 2 || tok[0] != key) {
      throw ParseError(std::string("calibrator file: expected '") + key + "'");
    }
    return tok[1];
  };

  Calibrator c;
  c.smoothing_scale_ = util::parse_double(keyed("smoothing_scale"), "L");
  const std::string mode = keyed("eval_mode");
  if (mode == "exact") {
    c.eval_mode_ = CalibratorEvalMode::kExact;
  } else if (mode == "grid") {
    c.eval_mode_ = CalibratorEvalMode::kGrid;
  } else {
    throw ParseError("unknown eval_mode '" + mode + "'");
  }
  c.grid_points_ = util::parse_int(keyed("grid_points"), "grid_points");
  const int nc = util::parse_int(keyed("n_correct"), "n_correct");
  const int nw = util::parse_int(keyed("n_wrong"), "n_wrong");
  if (nc < 1 || nw < 1) throw ParseError("degenerate calibrator counts");
  for (int k = 0; k < nc; ++k) {
    const auto tok = next_tokens();
    if (tok.size() != 2 || tok[0] != "P") {
      throw ParseError("expected positive score line");
    }
    c.positive_scores_.push_back(util::parse_double(tok[1], "score"));
  }
  for (int k = 0; k < nw; ++k) {
    const auto tok = next_tokens();
    if (tok.size() != 2 || tok[0] != "N") {
      throw ParseError("expected negative score line");
    }
    c.negative_scores_.push_back(util::parse_double(tok[1], "score"));
  }
  std::sort(c.positive_scores_.begin(), c.positive_scores_.end());
  std::sort(c.negative_scores_.begin(), c.negative_scores_.end());
  c.build_grid();
  return c;
}

std::string serialize_scores(const std::vector<ScoreRecord>& records) {
  std::string out;
  for (const ScoreRecord& r : records) {
    out += r.utterance_id + "\t" + std::to_string(r.arc_index) + "\t" +
           util::format_sig9(r.score) + "\t" + std::to_string(r.label) + "\n";
  }
  return out;
}

std::vector<ScoreRecord> parse_scores(const std::string& text) {
  std::vector<ScoreRecord> out;
  int line_no = 0;
  for (const std::string& line : util::split(text, '\n')) {
    ++line_no;
    if (line.empty()) continue;
    const auto cols = util::split(line, '\t');
    if (cols.size() != 4) {
      throw ParseError("expected 4 tab-separated columns", line_no);
    }
    ScoreRecord r;
    r.utterance_id = cols[0];
    r.arc_index = util::parse_int(cols[1], "arc index", line_no);
    r.score = util::parse_double(cols[2], "score", line_no);
    r.label = util::parse_int(cols[3], "label", line_no);
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace latconf
