#pragma once

#include <optional>
#include <vector>

#include "gpso/error.hpp"
#include "gpso/rollout.hpp"

namespace gpso {

// Verifier-measured quality of one pattern's group. Accuracy is kept as the
// exact pair (correct, total); comparisons use cross-multiplied integers so
// argmax ties are exact, never float-fuzzy.
struct PatternStats {
  int pattern_index = 0;
  int correct = 0;
  int total = 0;
  std::optional<int> min_correct_len;  // shortest correct trace, absent if none

  double accuracy() const { return static_cast<double>(correct) / static_cast<double>(total); }
};

inline PatternStats pattern_accuracy(const PatternGroup& group) {
  if (group.members.empty()) throw InputError("pattern_accuracy: empty group");
  PatternStats st;
  st.pattern_index = group.pattern_index;
  st.total = static_cast<int>(group.members.size());
  for (const Trajectory& t : group.members) {
    if (!t.reward.has_value()) throw StateError("pattern_accuracy: group not scored");
    if (*t.reward == 1) {
      st.correct += 1;
      if (!st.min_correct_len || t.length() < *st.min_correct_len) st.min_correct_len = t.length();
    }
  }
  return st;
}

struct SelectionResult {
  int selected_pattern = 0;
  bool tie_break = false;  // more than one pattern attained the max accuracy
  bool skip = false;       // degenerate batch: accuracies all 0 or all 1
};

// Optimal pattern: argmax accuracy; ties go to the minimum correct-trace
// length, then to enumeration order (the order of `stats`). Degenerate cases
// set `skip`: all-zero accuracy selects the adaptive pattern (there is no
// evidence to prefer an instruction) and all-perfect accuracy still runs the
// tie cascade. `adaptive_index` is the adaptive pattern's index, or -1.
inline SelectionResult select_optimal(const std::vector<PatternStats>& stats, int adaptive_index) {
  if (stats.empty()) throw InputError("select_optimal: no stats");
  for (const PatternStats& s : stats) {
    if (s.total <= 0) throw InputError("select_optimal: non-positive total");
    if (s.correct < 0 || s.correct > s.total) throw InputError("select_optimal: correct outside [0, total]");
    if (s.correct > 0 && !s.min_correct_len) {
      throw InputError("select_optimal: correct traces but no min length");
    }
  }
  bool all_zero = true, all_one = true;
  for (const PatternStats& s : stats) {
    if (s.correct != 0) all_zero = false;
    if (s.correct != s.total) all_one = false;
  }

  SelectionResult res;
  if (all_zero) {
    res.skip = true;
    res.tie_break = false;
    res.selected_pattern = stats.front().pattern_index;
    if (adaptive_index >= 0) {
      for (const PatternStats& s : stats) {
        if (s.pattern_index == adaptive_index) res.selected_pattern = adaptive_index;
      }
    }
    return res;
  }
  res.skip = all_one;

  // Exact accuracy compare: a/b > c/d  <=>  a*d > c*b for positive b, d.
  auto acc_greater = [](const PatternStats& a, const PatternStats& b) {
    return static_cast<long long>(a.correct) * b.total > static_cast<long long>(b.correct) * a.total;
  };
  auto acc_equal = [](const PatternStats& a, const PatternStats& b) {
    return static_cast<long long>(a.correct) * b.total == static_cast<long long>(b.correct) * a.total;
  };

  std::size_t best = 0;
  for (std::size_t i = 1; i < stats.size(); ++i) {
    if (acc_greater(stats[i], stats[best])) best = i;
  }
  std::vector<std::size_t> tied;
  for (std::size_t i = 0; i < stats.size(); ++i) {
    if (acc_equal(stats[i], stats[best])) tied.push_back(i);
  }
  if (tied.size() == 1) {
    res.selected_pattern = stats[best].pattern_index;
    return res;
  }
  res.tie_break = true;
  std::size_t winner = tied.front();
  for (std::size_t i : tied) {
    // Max accuracy is positive here, so every tied pattern has a length.
    if (*stats[i].min_correct_len < *stats[winner].min_correct_len) winner = i;
  }
  res.selected_pattern = stats[winner].pattern_index;
  return res;
}

}  // namespace gpso
