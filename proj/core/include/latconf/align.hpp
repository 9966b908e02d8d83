#pragma once

#include <optional>
#include <string>
#include <vector>

namespace latconf {

enum class AlignKind { kMatch, kSubstitute, kDelete, kInsert };

// One edit operation transforming the hypothesis into the reference.
// kDelete removes a hypothesis word (no reference index); kInsert inserts a
// reference word (no hypothesis index).
struct AlignOp {
  AlignKind kind;
  std::optional<int> hyp_index;
  std::optional<int> ref_index;
};

struct Alignment {
  std::vector<AlignOp> ops;

  int distance() const;  // number of non-match operations
  int matches() const;
  int substitutions() const;
  int deletions() const;   // hypothesis-only words
  int insertions() const;  // reference-only words
};

// Minimum unit-cost edit alignment of hyp against ref. Tie-breaking is fixed:
// backtracking from the end of both sequences, prefer match, then substitute,
// then delete, then insert.
Alignment align(const std::vector<std::string>& hyp,
                const std::vector<std::string>& ref);

}  // namespace latconf
