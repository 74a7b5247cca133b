#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "gpso/arch.hpp"
#include "gpso/patterns.hpp"
#include "gpso/problem.hpp"
#include "gpso/rng.hpp"
#include "gpso/sampler.hpp"
#include "gpso/verifier.hpp"

namespace gpso {

// One sampled response. The conditioning prefix is prompt + pattern suffix;
// only the layout is stored (the prompt regenerates from the problem).
// Regeneration recipe: Rng stream `seed`, same snapshot, same temperature.
struct Trajectory {
  std::uint64_t problem_id = 0;
  int pattern_index = 0;
  std::uint64_t seed = 0;
  int prompt_len = 0;
  int suffix_len = 0;
  std::vector<int> response;
  std::vector<double> logprobs;  // rollout-time, per response token
  bool truncated = false;
  std::optional<int> reward;  // set once by score_group

  // Response length: tokens up to and including EOS (all of them when
  // truncated).
  int length() const { return static_cast<int>(response.size()); }
};

struct PatternGroup {
  int pattern_index = 0;
  std::vector<Trajectory> members;
};

struct PatternGroupSet {
  std::uint64_t problem_id = 0;
  std::vector<PatternGroup> groups;  // pattern enumeration order
};

// m trajectories for one (problem, pattern). Trajectory k samples from Rng
// stream seed+k, so any single trajectory regenerates in isolation.
template <typename Real>
PatternGroup rollout_group(SequenceRun<Real>& run, const VocabSpec& vocab, const Problem& problem,
                           const Pattern& pattern, int m, double temperature, int max_new,
                           std::uint64_t seed) {
  if (m < 1) throw ConfigError("rollout_group: m must be >= 1");
  if (problem.prompt.empty()) throw InputError("rollout_group: empty prompt");
  PatternGroup group;
  group.pattern_index = pattern.index;
  group.members.reserve(static_cast<std::size_t>(m));
  for (int k = 0; k < m; ++k) {
    run.reset();
    for (int t : problem.prompt) run.append(t, true);
    for (int t : pattern.suffix) run.append(t, true);
    SampleResult s = sample_response(run, vocab, temperature, max_new,
                                     seed + static_cast<std::uint64_t>(k));
    Trajectory traj;
    traj.problem_id = problem.id;
    traj.pattern_index = pattern.index;
    traj.seed = seed + static_cast<std::uint64_t>(k);
    traj.prompt_len = static_cast<int>(problem.prompt.size());
    traj.suffix_len = static_cast<int>(pattern.suffix.size());
    traj.response = std::move(s.tokens);
    traj.logprobs = std::move(s.logprobs);
    traj.truncated = s.truncated;
    group.members.push_back(std::move(traj));
  }
  return group;
}

// Multi-pattern rollout: one group per pattern, disjoint seed streams derived
// from (master seed, problem id, pattern index). Trajectory (j, k) therefore
// has seed mix(master, problem, j) + k.
template <typename Real>
PatternGroupSet rollout_all_patterns(SequenceRun<Real>& run, const VocabSpec& vocab,
                                     const Problem& problem, const PatternSet& patterns, int m,
                                     double temperature, int max_new, std::uint64_t master_seed) {
  PatternGroupSet set;
  set.problem_id = problem.id;
  set.groups.reserve(static_cast<std::size_t>(patterns.size()));
  for (const Pattern& pat : patterns.patterns) {
    std::uint64_t group_seed =
        mix_seed({master_seed, problem.id, static_cast<std::uint64_t>(pat.index)});
    set.groups.push_back(
        rollout_group(run, vocab, problem, pat, m, temperature, max_new, group_seed));
  }
  return set;
}

// Scores every member with the binary verifier. Scoring twice is a state
// error: rewards are immutable once assigned.
inline void score_group(PatternGroup& group, const VocabSpec& vocab, const Problem& problem) {
  for (const Trajectory& t : group.members) {
    if (t.reward.has_value()) throw StateError("score_group: group already scored");
  }
  for (Trajectory& t : group.members) {
    t.reward = verify(vocab, t.response, problem.golden);
  }
}

inline void score_all(PatternGroupSet& set, const VocabSpec& vocab, const Problem& problem) {
  for (PatternGroup& g : set.groups) score_group(g, vocab, problem);
}

}  // namespace gpso
