#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "gpso/adamw.hpp"
#include "gpso/arch.hpp"
#include "gpso/corpus.hpp"
#include "gpso/model.hpp"

namespace gpso {

// Supervised warm start: Adam on mean per-token negative log-likelihood of
// target continuations, with a linear warmup over the first 5% of steps and
// cosine decay from the peak lr to zero over the rest (constant lr leaves the
// small model bouncing between basins). Minibatches of up to 64 examples are
// taken in corpus order, no shuffling, so a fit is a pure function of
// (snapshot, corpus, epochs, lr). Returns the mean NLL per epoch. Real
// selects the compute precision; parameters and optimizer state stay 64-bit.
template <typename Real = double>
std::vector<double> warmstart_fit(PolicySnapshot& snapshot,
                                  const std::vector<WarmstartExample>& corpus, int epochs,
                                  double lr) {
  if (epochs < 0) throw ConfigError("warmstart_fit: negative epochs");
  if (!(lr > 0.0)) throw ConfigError("warmstart_fit: lr must be positive");
  if (corpus.empty()) throw InputError("warmstart_fit: empty corpus");
  for (const WarmstartExample& ex : corpus) {
    if (ex.input.empty() || ex.target.empty()) throw InputError("warmstart_fit: empty example");
    if (static_cast<int>(ex.input.size() + ex.target.size()) > snapshot.arch.context_length) {
      throw InputError("warmstart_fit: example exceeds context length");
    }
  }

  const std::size_t n_params = snapshot.params.size();
  const std::size_t batch = 64;
  AdamWConfig opt;
  opt.lr = lr;
  AdamWState state;
  const std::size_t steps_per_epoch = (corpus.size() + batch - 1) / batch;
  const std::size_t total_steps = steps_per_epoch * static_cast<std::size_t>(epochs);
  std::size_t step_index = 0;
  std::vector<Real> mirror(snapshot.params.begin(), snapshot.params.end());
  SequenceRun<Real> run(snapshot.arch, mirror);
  std::vector<Real> grad(n_params, Real(0));
  std::vector<double> grad64(n_params, 0.0);
  std::vector<Real> weights;
  std::vector<double> epoch_losses;
  epoch_losses.reserve(static_cast<std::size_t>(epochs));

  for (int epoch = 0; epoch < epochs; ++epoch) {
    double epoch_nll = 0.0;
    std::size_t epoch_tokens = 0;
    for (std::size_t begin = 0; begin < corpus.size(); begin += batch) {
      const std::size_t end = std::min(begin + batch, corpus.size());
      // Token count first so per-token weights make the gradient the gradient
      // of the minibatch mean NLL.
      std::size_t mb_tokens = 0;
      for (std::size_t e = begin; e < end; ++e) mb_tokens += corpus[e].target.size();
      const Real unit = Real(1) / static_cast<Real>(mb_tokens);
      std::fill(grad.begin(), grad.end(), Real(0));
      double mb_nll = 0.0;
      for (std::size_t e = begin; e < end; ++e) {
        const WarmstartExample& ex = corpus[e];
        run.reset();
        for (int t : ex.input) run.append(t, true);
        for (int t : ex.target) run.append(t, true);
        const int len = run.length();
        const int in_len = static_cast<int>(ex.input.size());
        weights.assign(static_cast<std::size_t>(len), Real(0));
        // Position p predicts token p+1; targets sit at positions >= in_len.
        for (int p = in_len - 1; p + 1 < len; ++p) {
          weights[static_cast<std::size_t>(p)] = -unit;  // descent on NLL
          mb_nll -= static_cast<double>(
              run.logprobs_at(p)[run.tokens()[static_cast<std::size_t>(p) + 1]]);
        }
        run.backward(weights, grad);
      }
      // `grad` now holds d(mean NLL)/d theta; step downhill.
      for (std::size_t i = 0; i < n_params; ++i) grad64[i] = static_cast<double>(grad[i]);
      const std::size_t warmup = std::max<std::size_t>(1, total_steps / 20);
      if (step_index < warmup) {
        opt.lr = lr * static_cast<double>(step_index + 1) / static_cast<double>(warmup);
      } else {
        opt.lr = lr * 0.5 *
                 (1.0 + std::cos(std::numbers::pi * static_cast<double>(step_index - warmup) /
                                 static_cast<double>(total_steps - warmup)));
      }
      ++step_index;
      optimizer_step(snapshot.params, grad64, state, opt);
      mirror.assign(snapshot.params.begin(), snapshot.params.end());
      epoch_nll += mb_nll;
      epoch_tokens += mb_tokens;
    }
    epoch_losses.push_back(epoch_nll / static_cast<double>(epoch_tokens));
  }
  return epoch_losses;
}

}  // namespace gpso
