#pragma once

#include <algorithm>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "gpso/parallel.hpp"
#include "gpso/rollout.hpp"

namespace gpso {

struct EvalOptions {
  int k = 4;
  double temperature = 0.6;
  int max_new_tokens = 8;
  std::uint64_t seed = 0;
  int workers = 1;
};

inline void validate_eval_options(const EvalOptions& o) {
  if (o.k < 1) throw ConfigError("eval: k must be >= 1");
  if (o.temperature < 0.0) throw ConfigError("eval: temperature must be >= 0");
  if (o.max_new_tokens < 1) throw ConfigError("eval: max_new_tokens must be >= 1");
  if (o.workers < 1) throw ConfigError("eval: workers must be >= 1");
}

// Sample j of (problem, pattern) always draws from Rng stream
// mix(seed, problem.id, pattern.index) + j, so every score below is computed
// on literally the same samples whether it is asked for alone or as part of a
// report. That coupling is what makes oracle >= fixed an identity, not a
// statistical tendency.
template <typename Real>
std::vector<double> per_problem_accuracy(const ArchConfig& arch, const std::vector<Real>& params,
                                         const VocabSpec& vocab, const std::vector<Problem>& problems,
                                         const Pattern& pattern, const EvalOptions& opts) {
  validate_eval_options(opts);
  if (problems.empty()) throw InputError("eval: empty problem set");
  std::vector<double> acc(problems.size(), 0.0);
  parallel_for(problems.size(), opts.workers, [&](std::size_t i) {
    SequenceRun<Real> run(arch, params);
    const Problem& prob = problems[i];
    const std::uint64_t gseed =
        mix_seed({opts.seed, prob.id, static_cast<std::uint64_t>(pattern.index)});
    PatternGroup g = rollout_group(run, vocab, prob, pattern, opts.k, opts.temperature,
                                   opts.max_new_tokens, gseed);
    score_group(g, vocab, prob);
    int correct = 0;
    for (const Trajectory& t : g.members) correct += t.reward.value();
    acc[i] = static_cast<double>(correct) / static_cast<double>(opts.k);
  });
  return acc;
}

template <typename Real>
double evaluate_fixed_pattern(const ArchConfig& arch, const std::vector<Real>& params,
                              const VocabSpec& vocab, const std::vector<Problem>& problems,
                              const Pattern& pattern, const EvalOptions& opts) {
  std::vector<double> acc = per_problem_accuracy(arch, params, vocab, problems, pattern, opts);
  double sum = 0.0;
  for (double a : acc) sum += a;
  return sum / static_cast<double>(acc.size());
}

// pass@1 with no instruction suffix. Output equals evaluate_fixed_pattern on
// the set's adaptive pattern with the same seed.
template <typename Real>
double evaluate_pass1(const ArchConfig& arch, const std::vector<Real>& params, const VocabSpec& vocab,
                      const std::vector<Problem>& problems, const PatternSet& patterns,
                      const EvalOptions& opts) {
  return evaluate_fixed_pattern(arch, params, vocab, problems,
                                patterns.at(patterns.adaptive_index()), opts);
}

// Per problem, the best pattern's accuracy on that problem; averaged.
template <typename Real>
double best_pattern_oracle(const ArchConfig& arch, const std::vector<Real>& params,
                           const VocabSpec& vocab, const std::vector<Problem>& problems,
                           const std::vector<Pattern>& patterns, const EvalOptions& opts) {
  if (patterns.empty()) throw InputError("best_pattern_oracle: no patterns");
  std::vector<std::vector<double>> acc;
  acc.reserve(patterns.size());
  for (const Pattern& p : patterns) {
    acc.push_back(per_problem_accuracy(arch, params, vocab, problems, p, opts));
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < problems.size(); ++i) {
    double best = 0.0;
    for (std::size_t j = 0; j < patterns.size(); ++j) best = std::max(best, acc[j][i]);
    sum += best;
  }
  return sum / static_cast<double>(problems.size());
}

// Classifies a free (no-suffix) response by the first pattern tag it emits.
// Buckets: one per vocab tag, plus "untagged"; values sum to 1.
template <typename Real>
std::vector<std::pair<std::string, double>> pattern_usage(const ArchConfig& arch,
                                                          const std::vector<Real>& params,
                                                          const VocabSpec& vocab,
                                                          const std::vector<Problem>& problems,
                                                          const PatternSet& patterns,
                                                          const EvalOptions& opts) {
  validate_eval_options(opts);
  if (problems.empty()) throw InputError("eval: empty problem set");
  const Pattern& adaptive = patterns.at(patterns.adaptive_index());
  const std::size_t tag_count = vocab.pattern_tag_ids.size();
  std::vector<std::vector<int>> counts(problems.size(), std::vector<int>(tag_count + 1, 0));
  parallel_for(problems.size(), opts.workers, [&](std::size_t i) {
    SequenceRun<Real> run(arch, params);
    const Problem& prob = problems[i];
    const std::uint64_t gseed =
        mix_seed({opts.seed, prob.id, static_cast<std::uint64_t>(adaptive.index)});
    PatternGroup g = rollout_group(run, vocab, prob, adaptive, opts.k, opts.temperature,
                                   opts.max_new_tokens, gseed);
    for (const Trajectory& t : g.members) {
      std::size_t bucket = tag_count;  // untagged
      for (int tok : t.response) {
        bool is_tag = false;
        for (std::size_t j = 0; j < tag_count; ++j) {
          if (tok == vocab.pattern_tag_ids[j]) {
            bucket = j;
            is_tag = true;
            break;
          }
        }
        if (is_tag) break;
      }
      counts[i][bucket] += 1;
    }
  });
  std::vector<double> totals(tag_count + 1, 0.0);
  double all = 0.0;
  for (const std::vector<int>& row : counts) {
    for (std::size_t b = 0; b < row.size(); ++b) {
      totals[b] += row[b];
      all += row[b];
    }
  }
  std::vector<std::pair<std::string, double>> out;
  for (std::size_t b = 0; b < tag_count; ++b) {
    // A tag is named after the pattern whose suffix announces it.
    std::string name = "tag" + std::to_string(b);
    for (const Pattern& p : patterns.patterns) {
      if (!p.suffix.empty() && p.suffix[0] == vocab.pattern_tag_ids[b]) {
        name = p.name;
        break;
      }
    }
    out.emplace_back(name, totals[b] / all);
  }
  out.emplace_back("untagged", totals[tag_count] / all);
  return out;
}

struct EvalReport {
  int problem_count = 0;
  int k = 0;
  double temperature = 0.0;
  double adaptive_pass1 = 0.0;
  double oracle_pass1 = 0.0;
  std::vector<std::pair<std::string, double>> fixed;       // per concrete pattern
  std::vector<std::pair<std::string, double>> per_family;  // adaptive score by family
  std::vector<std::pair<std::string, double>> usage;       // tag histogram, sums to 1
};

// One coupled pass: every score in the report shares the per-sample seed
// scheme above. The oracle ranges over every pattern in the set, adaptive
// included, so it dominates each reported score on the same samples.
template <typename Real>
EvalReport evaluate_full(const ArchConfig& arch, const std::vector<Real>& params,
                         const VocabSpec& vocab, const PatternSet& patterns,
                         const std::vector<Problem>& problems, const EvalOptions& opts) {
  validate_eval_options(opts);
  if (problems.empty()) throw InputError("eval: empty problem set");
  EvalReport rep;
  rep.problem_count = static_cast<int>(problems.size());
  rep.k = opts.k;
  rep.temperature = opts.temperature;

  std::vector<int> concrete = patterns.concrete_indices();
  std::vector<std::vector<double>> fixed_acc(concrete.size());
  for (std::size_t j = 0; j < concrete.size(); ++j) {
    fixed_acc[j] =
        per_problem_accuracy(arch, params, vocab, problems, patterns.at(concrete[j]), opts);
  }
  std::vector<double> adaptive_acc = per_problem_accuracy(
      arch, params, vocab, problems, patterns.at(patterns.adaptive_index()), opts);

  for (std::size_t j = 0; j < concrete.size(); ++j) {
    double sum = 0.0;
    for (double a : fixed_acc[j]) sum += a;
    rep.fixed.emplace_back(patterns.at(concrete[j]).name,
                           sum / static_cast<double>(problems.size()));
  }
  double asum = 0.0;
  for (double a : adaptive_acc) asum += a;
  rep.adaptive_pass1 = asum / static_cast<double>(problems.size());

  double osum = 0.0;
  for (std::size_t i = 0; i < problems.size(); ++i) {
    double best = adaptive_acc[i];
    for (std::size_t j = 0; j < concrete.size(); ++j) best = std::max(best, fixed_acc[j][i]);
    osum += best;
  }
  rep.oracle_pass1 = osum / static_cast<double>(problems.size());

  // Adaptive score split by family.
  std::vector<Family> fams;
  for (const Problem& p : problems) {
    if (std::find(fams.begin(), fams.end(), p.family) == fams.end()) fams.push_back(p.family);
  }
  for (Family f : fams) {
    double sum = 0.0;
    int n = 0;
    for (std::size_t i = 0; i < problems.size(); ++i) {
      if (problems[i].family == f) {
        sum += adaptive_acc[i];
        n += 1;
      }
    }
    rep.per_family.emplace_back(family_name(f), sum / static_cast<double>(n));
  }

  rep.usage = pattern_usage(arch, params, vocab, problems, patterns, opts);
  return rep;
}

}  // namespace gpso
