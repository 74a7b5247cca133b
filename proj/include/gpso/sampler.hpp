#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "gpso/model.hpp"
#include "gpso/rng.hpp"
#include "gpso/tokens.hpp"

namespace gpso {

struct SampleResult {
  std::vector<int> tokens;       // response, EOS included when emitted
  std::vector<double> logprobs;  // untempered log-prob of each chosen token
  bool truncated = false;        // hit max_new without EOS
};

// Draws up to max_new tokens continuing `run` (prefix already appended,
// non-empty). Temperature scales the sampling distribution only; recorded
// log-probs are the model's own, so they line up bit-for-bit with update-time
// scoring of the same context. PAD is excluded from the draw (the behavior
// policy renormalizes without it). temperature 0 is greedy argmax with
// lowest-id tie-break; the seed is then irrelevant.
template <typename Real>
SampleResult sample_response(SequenceRun<Real>& run, const VocabSpec& vocab, double temperature,
                             int max_new, std::uint64_t seed) {
  if (max_new < 1) throw InputError("sample_response: max_new must be >= 1");
  if (temperature < 0.0) throw InputError("sample_response: negative temperature");
  if (run.length() == 0) throw InputError("sample_response: empty prefix");
  SampleResult out;
  Rng rng(seed);
  const int vs = vocab.vocab_size;
  std::vector<double> weights(static_cast<std::size_t>(vs));
  for (int step = 0; step < max_new; ++step) {
    const Real* lp = run.logprobs_at(run.length() - 1);
    int chosen = -1;
    if (temperature == 0.0) {
      for (int t = 0; t < vs; ++t) {
        if (t == vocab.pad_id) continue;
        if (chosen < 0 || static_cast<double>(lp[t]) > static_cast<double>(lp[chosen])) chosen = t;
      }
    } else {
      double total = 0.0;
      for (int t = 0; t < vs; ++t) {
        weights[static_cast<std::size_t>(t)] =
            (t == vocab.pad_id) ? 0.0 : std::exp(static_cast<double>(lp[t]) / temperature);
        total += weights[static_cast<std::size_t>(t)];
      }
      const double u = rng.next_double() * total;
      double acc = 0.0;
      for (int t = 0; t < vs; ++t) {
        if (t == vocab.pad_id) continue;
        acc += weights[static_cast<std::size_t>(t)];
        chosen = t;
        if (u < acc) break;  // ties/rounding resolve to the last scanned id
      }
    }
    out.tokens.push_back(chosen);
    out.logprobs.push_back(static_cast<double>(lp[chosen]));
    if (chosen == vocab.eos_id) return out;
    if (step + 1 < max_new) run.append(chosen, true);
  }
  out.truncated = true;
  return out;
}

}  // namespace gpso
