#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace latconf::util {

inline constexpr double kLogZero = -1e300;

// log(exp(a) + exp(b)) with max-subtraction.
double log_sum_exp(double a, double b);
double log_sum_exp(std::span<const double> xs);

double sigmoid(double z);
// log(1 + exp(z)) without overflow.
double softplus(double z);

uint64_t fnv1a64(std::string_view s);
uint64_t mix64(uint64_t x);
uint64_t hash_combine(uint64_t a, uint64_t b);

// Deterministic splitmix64-based generator. The standard <random>
// distributions are implementation-defined, so everything that must be
// reproducible byte-for-byte draws through this class instead.
class Rng {
 public:
  explicit Rng(uint64_t seed) : seed_(seed), state_(seed) {}

  uint64_t next_u64();
  double uniform();                        // [0, 1)
  double uniform(double lo, double hi);    // [lo, hi)
  int uniform_int(int lo, int hi);         // inclusive bounds
  double gaussian();                       // standard normal
  double gaussian(double mean, double stddev);

  // Independent stream derived from this generator's seed and a salt.
  Rng fork(uint64_t salt) const { return Rng(hash_combine(seed_, salt)); }

 private:
  uint64_t seed_;
  uint64_t state_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

// Fixed decimal formatting used by the canonical text formats.
std::string format_fixed6(double v);
// 9 significant digits, used by model and calibrator files.
std::string format_sig9(double v);

std::vector<std::string> split_whitespace(std::string_view s);
std::vector<std::string> split(std::string_view s, char sep);
std::string join(std::span<const std::string> parts, std::string_view sep);

int parse_int(std::string_view s, std::string_view what, int line = 0);
double parse_double(std::string_view s, std::string_view what, int line = 0);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, std::string_view content);
// Names (not paths) of regular files in `dir` with the given extension,
// sorted ascending.
std::vector<std::string> list_files(const std::string& dir,
                                    std::string_view extension);

}  // namespace latconf::util
