#include "cli_common.hpp"

#include <atomic>
#include <chrono>
#include <filesystem>
#include <mutex>
#include <thread>

#include "latconf/error.hpp"
#include "latconf/util.hpp"
#include "latconf/version.hpp"

namespace latconf::cli {

void parallel_for(size_t n, int workers,
                  const std::function<void(size_t)>& fn) {
  if (n == 0) return;
  const int count = std::max(1, std::min<int>(workers, static_cast<int>(n)));
  if (count == 1) {
    for (size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<size_t> next{0};
  std::vector<std::thread> pool;
  std::atomic<bool> failed{false};
  std::string first_error;
  std::mutex error_mutex;
  pool.reserve(count);
  for (int w = 0; w < count; ++w) {
    pool.emplace_back([&] {
      while (true) {
        const size_t i = next.fetch_add(1);
        if (i >= n || failed.load()) return;
        try {
          fn(i);
        } catch (const std::exception& e) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!failed.exchange(true)) first_error = e.what();
          return;
        }
      }
    });
  }
  for (std::thread& t : pool) t.join();
  if (failed.load()) throw Error(first_error);
}

Manifest::Manifest(std::string subcommand)
    : subcommand_(std::move(subcommand)),
      start_(std::chrono::steady_clock::now()) {}

void Manifest::flag(const std::string& name, const std::string& value) {
  entries_.push_back({"flag." + name, value});
}
void Manifest::flag(const std::string& name, double value) {
  entries_.push_back({"flag." + name, util::format_sig9(value)});
}
void Manifest::flag(const std::string& name, int value) {
  entries_.push_back({"flag." + name, std::to_string(value)});
}
void Manifest::flag(const std::string& name, uint64_t value) {
  entries_.push_back({"flag." + name, std::to_string(value)});
}
void Manifest::input(const std::string& name, const std::string& path) {
  entries_.push_back({"input." + name, path});
}
void Manifest::output(const std::string& name, const std::string& path) {
  entries_.push_back({"output." + name, path});
}

void Manifest::write_beside(const std::string& beside_path) const {
  namespace fs = std::filesystem;
  const double elapsed =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start_)
          .count();
  std::string out;
  out += "tool latconf " + std::string(kToolVersion) + "\n";
  out += "subcommand " + subcommand_ + "\n";
  out += "formats lattice=" + std::to_string(kLatticeFormatVersion) +
         " hwcn=" + std::to_string(kHwcnFormatVersion) +
         " model=" + std::to_string(kModelFormatVersion) +
         " calibrator=" + std::to_string(kCalibratorFormatVersion) + "\n";
  for (const auto& [k, v] : entries_) out += k + " " + v + "\n";
  char buf[64];
  std::snprintf(buf, sizeof(buf), "wall_clock_seconds %.3f\n", elapsed);
  out += buf;

  fs::path p(beside_path);
  const fs::path target = fs::is_directory(p) ? p / "run.manifest"
                                              : p.parent_path().empty()
                                                    ? fs::path(beside_path +
                                                               ".manifest")
                                                    : p.parent_path() /
                                                          (p.filename()
                                                               .string() +
                                                           ".manifest");
  util::write_text_file(target.string(), out);
}

std::string utterance_of_filename(const std::string& filename) {
  const size_t dot = filename.rfind('.');
  return dot == std::string::npos ? filename : filename.substr(0, dot);
}

std::vector<std::string> corpus_files(const std::string& dir,
                                      const std::string& extension,
                                      const std::string& split) {
  std::vector<std::string> files = util::list_files(dir, extension);
  if (split == "all") return files;
  Split wanted;
  if (split == "train") {
    wanted = Split::kTrain;
  } else if (split == "dev") {
    wanted = Split::kDev;
  } else if (split == "eval") {
    wanted = Split::kEval;
  } else {
    throw ContractError("unknown split '" + split + "'");
  }
  std::vector<std::string> kept;
  for (const std::string& f : files) {
    if (split_of(utterance_of_filename(f)) == wanted) kept.push_back(f);
  }
  return kept;
}

WordsById subset_refs(const WordsById& refs,
                      const std::vector<std::string>& utterances) {
  WordsById out;
  for (const std::string& utt : utterances) {
    const auto it = refs.find(utt);
    if (it == refs.end()) {
      throw ContractError("no reference for utterance " + utt);
    }
    out[utt] = it->second;
  }
  return out;
}

int default_workers() {
  const unsigned n = std::thread::hardware_concurrency();
  return n == 0 ? 1 : static_cast<int>(n);
}

}  // namespace latconf::cli
