#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "gpso/error.hpp"
#include "gpso/rng.hpp"
#include "gpso/tokens.hpp"

namespace gpso {

enum class Family : int {
  mod_chain = 0,   // left-to-right op chain reduced modulo a small prime
  select_idx = 1,  // index of the largest candidate in a list
};

inline const char* family_name(Family f) {
  switch (f) {
    case Family::mod_chain: return "mod_chain";
    case Family::select_idx: return "select_idx";
  }
  throw InputError("family_name: unknown family");
}

inline Family family_from_name(const std::string& s) {
  if (s == "mod_chain") return Family::mod_chain;
  if (s == "select_idx") return Family::select_idx;
  throw ConfigError("unknown task family '" + s + "'");
}

struct Problem {
  std::uint64_t id = 0;  // mix of (family, difficulty, seed); unique per triple
  Family family = Family::mod_chain;
  int difficulty = 1;
  std::uint64_t seed = 0;
  std::vector<int> prompt;  // task tokens, never empty
  std::vector<int> golden;  // canonical answer digits (no leading zeros)
};

// Deterministic in (family, difficulty, seed). The difficulty-1 spaces are
// deliberately small (hundreds of instances) so the answer function is
// learnable from a few thousand warm-start traces.
inline Problem generate_problem(const VocabSpec& vocab, Family family, int difficulty,
                                std::uint64_t seed) {
  if (difficulty < 1) throw ConfigError("generate_problem: difficulty must be >= 1");
  Problem p;
  p.family = family;
  p.difficulty = difficulty;
  p.seed = seed;
  p.id = mix_seed({static_cast<std::uint64_t>(family), static_cast<std::uint64_t>(difficulty), seed});
  Rng rng(mix_seed({0x70726f62ull, static_cast<std::uint64_t>(family),
                    static_cast<std::uint64_t>(difficulty), seed}));
  if (family == Family::mod_chain) {
    if (vocab.mod_id < 0 || vocab.add_id < 0 || vocab.mul_id < 0) {
      throw ConfigError("generate_problem: vocab lacks mod_chain tokens");
    }
    // difficulty d: d+1 single-digit operands, ops from {+, *}, mod 7. The
    // chain evaluates left to right (no precedence) and reduces after every
    // op, so each step is a small closed table over (running value, operand).
    int operands = difficulty + 1;
    long long acc = static_cast<long long>(rng.next_below(10));
    p.prompt.push_back(vocab.digit_token(static_cast<int>(acc)));
    const int modulus = 7;
    for (int i = 1; i < operands; ++i) {
      bool mul = rng.next_bernoulli(0.5);
      int operand = static_cast<int>(rng.next_below(10));
      p.prompt.push_back(mul ? vocab.mul_id : vocab.add_id);
      p.prompt.push_back(vocab.digit_token(operand));
      acc = mul ? acc * operand : acc + operand;
      acc %= modulus;  // stepwise reduction, exact for + and *
    }
    p.prompt.push_back(vocab.mod_id);
    p.prompt.push_back(vocab.digit_token(modulus));
    p.golden = vocab.number_tokens(acc % modulus);
  } else {
    if (vocab.pick_id < 0) throw ConfigError("generate_problem: vocab lacks select_idx tokens");
    // difficulty d: d+2 distinct digit candidates; answer is the 0-based
    // index of the largest.
    int count = difficulty + 2;
    if (count > vocab.digit_count) throw ConfigError("generate_problem: too many candidates for digit vocab");
    std::vector<int> pool;
    for (int d = 0; d < vocab.digit_count; ++d) pool.push_back(d);
    // Partial Fisher-Yates draw of `count` distinct digits.
    std::vector<int> cands;
    for (int i = 0; i < count; ++i) {
      std::size_t j = static_cast<std::size_t>(i) + rng.next_below(pool.size() - static_cast<std::size_t>(i));
      std::swap(pool[static_cast<std::size_t>(i)], pool[j]);
      cands.push_back(pool[static_cast<std::size_t>(i)]);
    }
    p.prompt.push_back(vocab.pick_id);
    int best = 0;
    for (int i = 0; i < count; ++i) {
      p.prompt.push_back(vocab.digit_token(cands[static_cast<std::size_t>(i)]));
      if (cands[static_cast<std::size_t>(i)] > cands[static_cast<std::size_t>(best)]) best = i;
    }
    p.golden = vocab.number_tokens(best);
  }
  return p;
}

}  // namespace gpso
