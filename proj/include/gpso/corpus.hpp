#pragma once

#include <cstdint>
#include <vector>

#include "gpso/error.hpp"
#include "gpso/patterns.hpp"
#include "gpso/problem.hpp"
#include "gpso/rng.hpp"
#include "gpso/tokens.hpp"

namespace gpso {

struct FamilySpec {
  Family family = Family::mod_chain;
  int difficulty = 1;
};

// Warm-start generator settings. `affinity[f][s]` is the probability that a
// trace *following* concrete style s on a family-f problem carries the
// correct answer. The instruction suffix only biases which style a trace
// follows: with probability `suffix_adherence` the trace follows the
// instructed style, otherwise it falls back to a default habit, drawn from
// `default_style_weights` restricted to the other styles (obeying anyway when
// those weights leave no alternative). Unsuffixed inputs draw the style from
// `default_style_weights` directly. The weights are deliberately lopsided: an
// untrained-but-warm-started policy leans on one dominant default style
// regardless of fit, and a style with zero weight surfaces only when its own
// suffix asks for it.
struct CorpusConfig {
  std::vector<FamilySpec> families;
  std::vector<std::vector<double>> affinity;  // [family][concrete style]
  double suffix_adherence = 0.8;
  std::vector<double> default_style_weights;  // over concrete styles
  int example_count = 0;
  std::uint64_t seed = 0;
  std::uint64_t problem_seed_count = 1;  // problem seeds drawn from [0, count)
};

struct WarmstartExample {
  std::vector<int> input;   // prompt (+ instruction suffix)
  std::vector<int> target;  // trace: tag, style body, delim, answer, eos
  int family_index = 0;
  int instructed_pattern = -1;  // index into the pattern set; -1 for none recorded
  int style = 0;                // concrete style the trace follows
  bool is_correct = false;
};

// A consistently wrong answer: last digit bumped by one. Deterministic so the
// "skill of being wrong" is itself learnable.
inline std::vector<int> corrupt_answer(const VocabSpec& vocab, std::vector<int> golden) {
  if (golden.empty()) throw InputError("corrupt_answer: empty golden answer");
  int last = golden.back();
  if (!vocab.is_digit(last)) throw InputError("corrupt_answer: non-digit answer");
  golden.back() = vocab.digit_token((last + 1) % vocab.digit_count);
  return golden;
}

// Work tokens for a stepwise mod_chain trace: the running value after each op
// except the last (whose result is the answer). Re-derived from the prompt so
// trace synthesis needs only the Problem.
inline std::vector<int> mod_chain_steps(const VocabSpec& vocab, const Problem& prob) {
  std::vector<int> steps;
  long long acc = vocab.digit_value(prob.prompt.at(0));
  std::size_t i = 1;
  while (i + 1 < prob.prompt.size() && prob.prompt[i] != vocab.mod_id) {
    bool mul = prob.prompt[i] == vocab.mul_id;
    acc = mul ? acc * vocab.digit_value(prob.prompt[i + 1]) : acc + vocab.digit_value(prob.prompt[i + 1]);
    acc %= 7;
    steps.push_back(vocab.digit_token(static_cast<int>(acc)));
    i += 2;
  }
  if (!steps.empty()) steps.pop_back();  // final step's result is the answer itself
  return steps;
}

// The winning candidate of a select_idx problem, as (value token, index
// token), plus the index one slot after it (cyclic). The shifted index is the
// coherently wrong final answer: never the true answer, and producible from
// the same maximum readout the correct trace uses plus a fixed rotation.
struct SelectRanks {
  int best_value = 0;
  int best_index = 0;
  int probe_index = 0;
};

inline SelectRanks select_ranks(const VocabSpec& vocab, const Problem& prob) {
  if (prob.prompt.size() < 3) throw InputError("select_ranks: malformed prompt");
  int best = -1;
  int count = static_cast<int>(prob.prompt.size()) - 1;
  for (int i = 0; i < count; ++i) {
    int v = vocab.digit_value(prob.prompt[static_cast<std::size_t>(i + 1)]);
    if (best < 0 || v > vocab.digit_value(prob.prompt[static_cast<std::size_t>(best + 1)])) {
      best = i;
    }
  }
  SelectRanks r;
  r.best_value = prob.prompt[static_cast<std::size_t>(best + 1)];
  r.best_index = vocab.digit_token(best);
  r.probe_index = vocab.digit_token((best + 1) % count);
  return r;
}

// Trace bodies per concrete style. All traces end "delim, answer, eos"; the
// styles differ in what comes before.
//   direct:  tag, delim, f, eos
//   reflect: tag, f, delim, f, eos     (echoes the answer, then commits)
//   explore: tag, work.., delim, f, eos (shows intermediate work first)
// Explore's work tokens are family-specific: running values for mod_chain
// (correct even in corrupted traces; only the final answer slips), and the
// maximum candidate's value for select_idx, where a corrupted trace examines
// the right candidate but reports the slot after it instead.
inline std::vector<int> synth_trace(const VocabSpec& vocab, int style, const Problem& prob,
                                    bool correct) {
  if (style < 0 || style > 2) throw InputError("synth_trace: style out of range");
  if (static_cast<int>(vocab.pattern_tag_ids.size()) <= style) {
    throw ConfigError("synth_trace: vocab lacks a tag for this style");
  }
  const std::vector<int>& golden = prob.golden;
  std::vector<int> final_answer = correct ? golden : corrupt_answer(vocab, golden);
  std::vector<int> t;
  t.push_back(vocab.pattern_tag_ids[static_cast<std::size_t>(style)]);
  if (style == 1) {
    t.insert(t.end(), final_answer.begin(), final_answer.end());
  } else if (style == 2) {
    if (prob.family == Family::mod_chain) {
      std::vector<int> steps = mod_chain_steps(vocab, prob);
      t.insert(t.end(), steps.begin(), steps.end());
    } else {
      SelectRanks r = select_ranks(vocab, prob);
      t.push_back(r.best_value);
      final_answer = correct ? golden : std::vector<int>{r.probe_index};
    }
  }
  t.push_back(vocab.answer_delim_id);
  t.insert(t.end(), final_answer.begin(), final_answer.end());
  t.push_back(vocab.eos_id);
  return t;
}

inline void validate_corpus_config(const CorpusConfig& cfg, const PatternSet& patterns) {
  if (cfg.families.empty()) throw ConfigError("corpus: at least one family required");
  std::size_t styles = patterns.concrete_indices().size();
  if (styles == 0) throw ConfigError("corpus: pattern set has no concrete patterns");
  if (cfg.affinity.size() != cfg.families.size()) {
    throw ConfigError("corpus: affinity table must have one row per family");
  }
  for (const auto& row : cfg.affinity) {
    if (row.size() != styles) throw ConfigError("corpus: affinity row size must match concrete pattern count");
    for (double a : row) {
      if (!(a >= 0.0 && a <= 1.0)) throw ConfigError("corpus: affinity outside [0, 1]");
    }
  }
  if (!(cfg.suffix_adherence >= 0.0 && cfg.suffix_adherence <= 1.0)) {
    throw ConfigError("corpus: suffix_adherence outside [0, 1]");
  }
  if (cfg.default_style_weights.size() != styles) {
    throw ConfigError("corpus: default_style_weights size must match concrete pattern count");
  }
  double sum = 0.0;
  for (double w : cfg.default_style_weights) {
    if (w < 0.0) throw ConfigError("corpus: negative default style weight");
    sum += w;
  }
  if (sum <= 0.0) throw ConfigError("corpus: default style weights sum to zero");
  if (cfg.example_count < 0) throw ConfigError("corpus: negative example count");
  if (cfg.problem_seed_count == 0) throw ConfigError("corpus: problem_seed_count must be positive");
}

// Examples cycle through families and input conditions (each pattern's suffix,
// adaptive included) so every cell gets even coverage. Correctness is
// Bernoulli in the affinity of the style the trace actually follows.
inline std::vector<WarmstartExample> build_warmstart_corpus(const VocabSpec& vocab,
                                                            const PatternSet& patterns,
                                                            const CorpusConfig& cfg) {
  validate_corpus_config(cfg, patterns);
  std::vector<int> concrete = patterns.concrete_indices();
  int styles = static_cast<int>(concrete.size());
  std::vector<WarmstartExample> out;
  out.reserve(static_cast<std::size_t>(cfg.example_count));
  for (int i = 0; i < cfg.example_count; ++i) {
    Rng rng(mix_seed({0x636f7270ull, cfg.seed, static_cast<std::uint64_t>(i)}));
    int fam = i % static_cast<int>(cfg.families.size());
    const FamilySpec& fs = cfg.families[static_cast<std::size_t>(fam)];
    std::uint64_t pseed = rng.next_below(cfg.problem_seed_count);
    Problem prob = generate_problem(vocab, fs.family, fs.difficulty, pseed);

    int cond = (i / static_cast<int>(cfg.families.size())) % patterns.size();
    const Pattern& instructed = patterns.at(cond);

    int style;
    if (instructed.adaptive()) {
      style = static_cast<int>(rng.next_categorical(cfg.default_style_weights));
    } else {
      // Position of the instructed pattern within the concrete list.
      int pos = 0;
      for (int j = 0; j < styles; ++j) {
        if (concrete[static_cast<std::size_t>(j)] == instructed.index) pos = j;
      }
      if (rng.next_bernoulli(cfg.suffix_adherence) || styles == 1) {
        style = pos;
      } else {
        std::vector<double> rest = cfg.default_style_weights;
        rest[static_cast<std::size_t>(pos)] = 0.0;
        double mass = 0.0;
        for (double w : rest) mass += w;
        style = mass > 0.0 ? static_cast<int>(rng.next_categorical(rest)) : pos;
      }
    }
    bool correct = rng.next_bernoulli(cfg.affinity[static_cast<std::size_t>(fam)][static_cast<std::size_t>(style)]);

    WarmstartExample ex;
    ex.input = prob.prompt;
    ex.input.insert(ex.input.end(), instructed.suffix.begin(), instructed.suffix.end());
    ex.target = synth_trace(vocab, style, prob, correct);
    ex.family_index = fam;
    ex.instructed_pattern = instructed.index;
    ex.style = style;
    ex.is_correct = correct;
    out.push_back(std::move(ex));
  }
  return out;
}

}  // namespace gpso
