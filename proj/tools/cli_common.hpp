#pragma once

#include <chrono>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "latconf/metrics.hpp"
#include "latconf/simgen.hpp"

namespace latconf::cli {

// Runs fn(0..n-1) on a bounded worker pool. Tasks must be independent;
// callers collect results into preallocated slots indexed by task, so the
// output is deterministic regardless of scheduling.
void parallel_for(size_t n, int workers, const std::function<void(size_t)>& fn);

// Reproducibility record written beside every output. Key order is fixed.
class Manifest {
 public:
  Manifest(std::string subcommand);
  void flag(const std::string& name, const std::string& value);
  void flag(const std::string& name, double value);
  void flag(const std::string& name, int value);
  void flag(const std::string& name, uint64_t value);
  void input(const std::string& name, const std::string& path);
  void output(const std::string& name, const std::string& path);
  // Writes "<beside>.manifest" (file outputs) or "<beside>/run.manifest"
  // (directory outputs), recording the elapsed wall clock.
  void write_beside(const std::string& beside_path) const;

 private:
  std::string subcommand_;
  std::vector<std::pair<std::string, std::string>> entries_;
  std::chrono::steady_clock::time_point start_;
};

// Utterance id of a corpus file name ("utt_000001.lat" -> "utt_000001").
std::string utterance_of_filename(const std::string& filename);

// Sorted file names in dir with the given extension, optionally restricted
// to one split ("all" keeps everything).
std::vector<std::string> corpus_files(const std::string& dir,
                                      const std::string& extension,
                                      const std::string& split);

// References restricted to the given utterance ids; throws if one is
// missing.
WordsById subset_refs(const WordsById& refs,
                      const std::vector<std::string>& utterances);

int default_workers();

}  // namespace latconf::cli
