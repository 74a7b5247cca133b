#pragma once

#include <string>
#include <vector>

#include "gpso/error.hpp"
#include "gpso/tokens.hpp"

namespace gpso {

// A reasoning pattern is an instruction suffix appended to the prompt at
// rollout time. The adaptive pattern is the empty suffix (no instruction).
struct Pattern {
  int index = 0;  // position in the canonical enumeration
  std::string name;
  std::vector<int> suffix;  // empty for adaptive

  bool adaptive() const { return suffix.empty(); }
};

struct PatternSet {
  std::vector<Pattern> patterns;

  const Pattern& at(int index) const {
    if (index < 0 || static_cast<std::size_t>(index) >= patterns.size()) {
      throw InputError("PatternSet: pattern index out of range");
    }
    return patterns[static_cast<std::size_t>(index)];
  }
  int size() const { return static_cast<int>(patterns.size()); }

  // Index of the adaptive (empty-suffix) pattern, or -1.
  int adaptive_index() const {
    for (const Pattern& p : patterns) {
      if (p.adaptive()) return p.index;
    }
    return -1;
  }

  // Concrete = carries a non-empty instruction suffix.
  std::vector<int> concrete_indices() const {
    std::vector<int> out;
    for (const Pattern& p : patterns) {
      if (!p.adaptive()) out.push_back(p.index);
    }
    return out;
  }
};

// Canonical four-pattern set. Concrete suffixes share one length so response
// bodies start at the same position under every instruction; only the
// adaptive (empty) suffix shifts them.
inline PatternSet default_patterns(const VocabSpec& vocab) {
  if (vocab.pattern_tag_ids.size() < 3 || vocab.instruction_ids.size() < 2) {
    throw ConfigError("default_patterns: vocab lacks tag or instruction tokens");
  }
  PatternSet set;
  set.patterns.push_back({0, "direct", {vocab.pattern_tag_ids[0], vocab.instruction_ids[0]}});
  set.patterns.push_back({1, "reflect", {vocab.pattern_tag_ids[1], vocab.instruction_ids[1]}});
  set.patterns.push_back({2, "explore", {vocab.pattern_tag_ids[2], vocab.instruction_ids[0]}});
  set.patterns.push_back({3, "adaptive", {}});
  return set;
}

inline void validate_patterns(const VocabSpec& vocab, const PatternSet& set) {
  if (set.patterns.empty()) throw ConfigError("pattern set is empty");
  for (std::size_t i = 0; i < set.patterns.size(); ++i) {
    const Pattern& p = set.patterns[i];
    if (p.index != static_cast<int>(i)) throw ConfigError("pattern indices must match enumeration order");
    if (!p.suffix.empty()) {
      bool starts_with_tag = false;
      for (int tag : vocab.pattern_tag_ids) {
        if (p.suffix.front() == tag) { starts_with_tag = true; break; }
      }
      if (!starts_with_tag) {
        throw ConfigError("pattern '" + p.name + "': non-empty suffix must begin with a pattern tag");
      }
    }
  }
}

// Subset selection by name, preserving enumeration order of `names`.
inline PatternSet select_patterns(const PatternSet& base, const std::vector<std::string>& names) {
  PatternSet out;
  for (const std::string& name : names) {
    bool found = false;
    for (const Pattern& p : base.patterns) {
      if (p.name == name) {
        Pattern q = p;
        q.index = static_cast<int>(out.patterns.size());
        out.patterns.push_back(q);
        found = true;
        break;
      }
    }
    if (!found) throw ConfigError("unknown pattern '" + name + "'");
  }
  return out;
}

}  // namespace gpso
