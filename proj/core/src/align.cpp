#include "latconf/align.hpp"

#include <algorithm>

namespace latconf {

int Alignment::distance() const {
  int d = 0;
  for (const AlignOp& op : ops) {
    if (op.kind != AlignKind::kMatch) ++d;
  }
  return d;
}

int Alignment::matches() const {
  return static_cast<int>(std::count_if(ops.begin(), ops.end(), [](auto& op) {
    return op.kind == AlignKind::kMatch;
  }));
}

int Alignment::substitutions() const {
  return static_cast<int>(std::count_if(ops.begin(), ops.end(), [](auto& op) {
    return op.kind == AlignKind::kSubstitute;
  }));
}

int Alignment::deletions() const {
  return static_cast<int>(std::count_if(ops.begin(), ops.end(), [](auto& op) {
    return op.kind == AlignKind::kDelete;
  }));
}

int Alignment::insertions() const {
  return static_cast<int>(std::count_if(ops.begin(), ops.end(), [](auto& op) {
    return op.kind == AlignKind::kInsert;
  }));
}

Alignment align(const std::vector<std::string>& hyp,
                const std::vector<std::string>& ref) {
  const size_t m = hyp.size();
  const size_t n = ref.size();
  std::vector<std::vector<int>> d(m + 1, std::vector<int>(n + 1, 0));
  for (size_t i = 0; i <= m; ++i) d[i][0] = static_cast<int>(i);
  for (size_t j = 0; j <= n; ++j) d[0][j] = static_cast<int>(j);
  for (size_t i = 1; i <= m; ++i) {
    for (size_t j = 1; j <= n; ++j) {
      const int sub_cost = hyp[i - 1] == ref[j - 1] ? 0 : 1;
      d[i][j] = std::min({d[i - 1][j - 1] + sub_cost, d[i - 1][j] + 1,
                          d[i][j - 1] + 1});
    }
  }

  Alignment out;
  size_t i = m;
  size_t j = n;
  while (i > 0 || j > 0) {
    if (i > 0 && j > 0 && hyp[i - 1] == ref[j - 1] &&
        d[i][j] == d[i - 1][j - 1]) {
      out.ops.push_back({AlignKind::kMatch, static_cast<int>(i - 1),
                         static_cast<int>(j - 1)});
      --i;
      --j;
    } else if (i > 0 && j > 0 && d[i][j] == d[i - 1][j - 1] + 1 &&
               hyp[i - 1] != ref[j - 1]) {
      out.ops.push_back({AlignKind::kSubstitute, static_cast<int>(i - 1),
                         static_cast<int>(j - 1)});
      --i;
      --j;
    } else if (i > 0 && d[i][j] == d[i - 1][j] + 1) {
      out.ops.push_back(
          {AlignKind::kDelete, static_cast<int>(i - 1), std::nullopt});
      --i;
    } else {
      out.ops.push_back(
          {AlignKind::kInsert, std::nullopt, static_cast<int>(j - 1)});
      --j;
    }
  }
  std::reverse(out.ops.begin(), out.ops.end());
  return out;
}

}  // namespace latconf
