#ifndef QEFORGE_TESTS_ORACLES_H_
#define QEFORGE_TESTS_ORACLES_H_

// Reference implementations written independently of the library, used only
// to check it.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace oracle {

using Words = std::vector<std::string>;

// Edit distance by plain recursion over suffixes, memoized.
class RecursiveEditDistance {
 public:
  RecursiveEditDistance(const Words& a, const Words& b) : a_(a), b_(b) {}

  size_t operator()() { return Solve(0, 0); }

 private:
  size_t Solve(size_t i, size_t j) {
    if (i == a_.size()) return b_.size() - j;
    if (j == b_.size()) return a_.size() - i;
    const auto key = std::make_pair(i, j);
    if (auto it = memo_.find(key); it != memo_.end()) return it->second;
    size_t best = Solve(i + 1, j + 1) + (a_[i] == b_[j] ? 0 : 1);
    best = std::min(best, Solve(i + 1, j) + 1);
    best = std::min(best, Solve(i, j + 1) + 1);
    memo_[key] = best;
    return best;
  }

  const Words& a_;
  const Words& b_;
  std::map<std::pair<size_t, size_t>, size_t> memo_;
};

inline size_t EditDistance(const Words& a, const Words& b) {
  return RecursiveEditDistance(a, b)();
}

// Moves a[first, first+len) so it starts at `dest` in the remainder.
inline Words ApplyShift(const Words& a, size_t first, size_t len, size_t dest) {
  Words block(a.begin() + first, a.begin() + first + len);
  Words rest;
  for (size_t i = 0; i < a.size(); ++i) {
    if (i < first || i >= first + len) rest.push_back(a[i]);
  }
  rest.insert(rest.begin() + dest, block.begin(), block.end());
  return rest;
}

// Smallest edit distance reachable with at most one block move of any span to
// any position, counting the move as one edit.
inline size_t BestSingleShiftEdits(const Words& mt, const Words& pe) {
  size_t best = EditDistance(mt, pe);
  for (size_t first = 0; first < mt.size(); ++first) {
    for (size_t len = 1; first + len <= mt.size(); ++len) {
      for (size_t dest = 0; dest + len <= mt.size(); ++dest) {
        if (dest == first) continue;
        best = std::min(best, 1 + EditDistance(ApplyShift(mt, first, len, dest), pe));
      }
    }
  }
  return best;
}

// MCC straight from the definition, BAD positive.
inline double Mcc(uint64_t tp, uint64_t fp, uint64_t tn, uint64_t fn) {
  const double num = static_cast<double>(tp) * static_cast<double>(tn) -
                     static_cast<double>(fp) * static_cast<double>(fn);
  const double den = std::sqrt(static_cast<double>(tp + fp)) *
                     std::sqrt(static_cast<double>(tp + fn)) *
                     std::sqrt(static_cast<double>(tn + fp)) *
                     std::sqrt(static_cast<double>(tn + fn));
  return den == 0.0 ? 0.0 : num / den;
}

// Two-pass mean and population variance.
inline std::pair<double, double> MeanVariance(const std::vector<double>& v) {
  double sum = 0.0;
  for (double x : v) sum += x;
  const double mean = sum / static_cast<double>(v.size());
  double sq = 0.0;
  for (double x : v) sq += (x - mean) * (x - mean);
  return {mean, sq / static_cast<double>(v.size())};
}

using LinkSet = std::vector<std::pair<int, int>>;

// grow-diag-final-and following Koehn's published pseudocode literally, over
// (source, target) links.
inline LinkSet GrowDiagFinalAnd(const LinkSet& e2f, const LinkSet& f2e,
                                int src_len, int tgt_len) {
  auto has = [](const LinkSet& s, int i, int j) {
    return std::find(s.begin(), s.end(), std::make_pair(i, j)) != s.end();
  };
  LinkSet uni = e2f;
  for (const auto& l : f2e) {
    if (!has(uni, l.first, l.second)) uni.push_back(l);
  }
  LinkSet alignment;
  for (const auto& l : e2f) {
    if (has(f2e, l.first, l.second)) alignment.push_back(l);
  }
  auto src_aligned = [&](int i) {
    for (const auto& l : alignment) {
      if (l.first == i) return true;
    }
    return false;
  };
  auto tgt_aligned = [&](int j) {
    for (const auto& l : alignment) {
      if (l.second == j) return true;
    }
    return false;
  };
  const int neighbors[8][2] = {{-1, 0}, {0, -1}, {1, 0}, {0, 1},
                               {-1, -1}, {-1, 1}, {1, -1}, {1, 1}};
  bool added = true;
  while (added) {
    added = false;
    for (int i = 0; i < src_len; ++i) {
      for (int j = 0; j < tgt_len; ++j) {
        if (!has(alignment, i, j)) continue;
        for (const auto& d : neighbors) {
          const int ni = i + d[0], nj = j + d[1];
          if (ni < 0 || nj < 0 || ni >= src_len || nj >= tgt_len) continue;
          if ((!src_aligned(ni) || !tgt_aligned(nj)) && has(uni, ni, nj) &&
              !has(alignment, ni, nj)) {
            alignment.emplace_back(ni, nj);
            added = true;
          }
        }
      }
    }
  }
  auto final_and = [&](const LinkSet& a) {
    for (int i = 0; i < src_len; ++i) {
      for (int j = 0; j < tgt_len; ++j) {
        if ((!src_aligned(i) && !tgt_aligned(j)) && has(a, i, j)) {
          alignment.emplace_back(i, j);
        }
      }
    }
  };
  final_and(e2f);
  final_and(f2e);
  std::sort(alignment.begin(), alignment.end());
  return alignment;
}

}  // namespace oracle

#endif  // QEFORGE_TESTS_ORACLES_H_
