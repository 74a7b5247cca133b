#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "gpso/advantage.hpp"
#include "gpso/config.hpp"
#include "gpso/evaluate.hpp"
#include "gpso/objective.hpp"
#include "gpso/parallel.hpp"
#include "gpso/rollout.hpp"
#include "gpso/selection.hpp"
#include "gpso/warmstart.hpp"

namespace gpso {

struct StepMetrics {
  int step = 0;
  double objective = 0.0;
  double surrogate = 0.0;
  double kl = 0.0;
  double grad_norm = 0.0;
  double mean_ratio = 0.0;
  double clip_fraction = 0.0;
  double mean_reward = 0.0;  // over every rollout this step, selected or not
  int skipped = 0;           // problems dropped by the selection skip rule
  int nonfinite = 0;         // minibatches whose gradient was rejected
  std::vector<int> chosen_histogram;  // problems updated, per active pattern
};

struct SelectionRecord {
  int step = 0;
  std::uint64_t problem_id = 0;
  std::string family;
  std::vector<int> correct;  // per active pattern
  std::vector<int> total;
  int selected = -1;  // -1 when the algorithm performs no selection
  bool tie_break = false;
  bool skip = false;
};

struct EvalSnapshot {
  int step = 0;
  EvalReport report;
};

struct TrainLogs {
  std::vector<double> warmstart_nll;  // per epoch, when train() ran the warm start
  std::vector<StepMetrics> steps;
  std::vector<SelectionRecord> selections;
  std::vector<EvalSnapshot> evals;
};

struct TrainOutput {
  PolicySnapshot snapshot;
  AdamWState opt;
  TrainLogs logs;
};

// Held-out problems: seeds from a range disjoint from training by config
// validation, families cycled.
inline std::vector<Problem> make_eval_problems(const VocabSpec& vocab, const EnvConfig& env) {
  std::vector<Problem> out;
  out.reserve(static_cast<std::size_t>(env.eval_problem_count));
  for (int i = 0; i < env.eval_problem_count; ++i) {
    const FamilySpec& fs = env.families[static_cast<std::size_t>(i) % env.families.size()];
    out.push_back(generate_problem(vocab, fs.family, fs.difficulty,
                                   env.eval_seed_start + static_cast<std::uint64_t>(i)));
  }
  return out;
}

// Imitation sanity gate. The warm start lands in a random loss basin, and a
// bad basin leaves some instruction unusable; every family must have at least
// one pattern the policy can execute on training-seed problems before RL has
// anything to select between.
inline bool warmstart_gate_ok(const RunConfig& cfg, const PolicySnapshot& snap,
                              const VocabSpec& vocab) {
  const PatternSet full = full_patterns(vocab);
  constexpr int kGateProblems = 24;
  EvalOptions eo;
  eo.k = 2;
  eo.temperature = cfg.train.temperature;
  eo.max_new_tokens = cfg.train.max_new_tokens;
  eo.workers = 1;
  for (const FamilySpec& fs : cfg.env.families) {
    std::vector<Problem> probs;
    for (int i = 0; i < kGateProblems; ++i) {
      probs.push_back(generate_problem(vocab, fs.family, fs.difficulty, static_cast<std::uint64_t>(i)));
    }
    double best = 0.0;
    for (int p = 0; p < full.size(); ++p) {
      eo.seed = mix_seed({cfg.seed, 0x67617465ull, static_cast<std::uint64_t>(fs.family),
                          static_cast<std::uint64_t>(p)});
      best = std::max(best, evaluate_fixed_pattern(cfg.arch, snap.params, vocab, probs, full.at(p), eo));
    }
    if (best < cfg.train.warmstart_gate) return false;
  }
  return true;
}

// Fresh initialization plus the supervised warm start. Every seed below
// derives from the one master seed. A failed gate redraws the init; attempt 0
// keys off the run seed alone, so runs with warmstart_attempts = 1 behave as
// if the gate did not exist.
template <typename Real>
PolicySnapshot warmstarted_policy(const RunConfig& cfg, std::vector<double>* nll_out) {
  const VocabSpec vocab = default_vocab();
  ArchConfig arch = cfg.arch;
  PolicySnapshot snapshot = init_policy(arch, cfg.seed);
  if (cfg.train.warmstart_epochs > 0 && cfg.env.warmstart_examples > 0) {
    std::vector<WarmstartExample> corpus =
        build_warmstart_corpus(vocab, full_patterns(vocab), corpus_config_from(cfg));
    std::vector<double> nll;
    for (int attempt = 0;; ++attempt) {
      if (attempt > 0) {
        snapshot = init_policy(
            arch, mix_seed({cfg.seed, 0x72657365ull, static_cast<std::uint64_t>(attempt)}));
      }
      nll = warmstart_fit<Real>(snapshot, corpus, cfg.train.warmstart_epochs,
                                cfg.train.warmstart_lr);
      if (attempt + 1 >= cfg.train.warmstart_attempts) break;
      if (warmstart_gate_ok(cfg, snapshot, vocab)) break;
    }
    if (nll_out) *nll_out = std::move(nll);
  } else if (nll_out) {
    nll_out->clear();
  }
  return snapshot;
}

namespace traindetail {

inline double l2_norm(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

inline bool all_finite(const std::vector<double>& v) {
  for (double x : v) {
    if (!std::isfinite(x)) return false;
  }
  return true;
}

}  // namespace traindetail

// The rollout -> score -> select -> update loop. Parallel phases write into
// index-owned slots with seeds derived from (config seed, step, slot), so the
// output is a pure function of (config, start, seed) at any worker count.
template <typename Real>
TrainOutput train(const RunConfig& cfg, const PolicySnapshot& start, int workers) {
  validate_run_config(cfg);
  if (workers < 1) throw ConfigError("train: workers must be >= 1");
  if (start.params.size() != param_count(cfg.arch)) {
    throw InputError("train: starting snapshot does not match arch");
  }
  const VocabSpec vocab = default_vocab();
  const PatternSet active = active_patterns(cfg, vocab);
  const PatternSet full = full_patterns(vocab);
  const TrainConfig& tc = cfg.train;
  const ClipConfig& clip = tc.clip;
  const Algorithm algo = tc.algorithm;
  const bool masked = algo == Algorithm::gpso || algo == Algorithm::gpso_no_ops;
  const bool use_selection = algo == Algorithm::gpso || algo == Algorithm::gpso_no_mask;
  const bool use_kl = clip.kl_beta > 0.0;

  TrainOutput out;
  out.snapshot = start;
  std::vector<double>& params = out.snapshot.params;

  // Compute-precision mirror of the parameters, refreshed after each
  // optimizer step; the reference mirror freezes the starting policy.
  std::vector<Real> mirror(params.begin(), params.end());
  const std::vector<Real> ref_mirror = mirror;

  const int n_pat = active.size();
  const int m = tc.rollouts_per_pattern;
  const int batch = tc.batch_size;
  const int mb_problems = tc.minibatch_size;
  std::vector<Problem> eval_problems;
  if (tc.eval_every > 0) eval_problems = make_eval_problems(vocab, cfg.env);
  int consecutive_nonfinite = 0;

  for (int step = 0; step < tc.steps; ++step) {
    // Problem batch for this step.
    Rng batch_rng(mix_seed({cfg.seed, 0x62617463ull, static_cast<std::uint64_t>(step)}));
    std::vector<Problem> problems;
    problems.reserve(static_cast<std::size_t>(batch));
    for (int b = 0; b < batch; ++b) {
      const FamilySpec& fs =
          cfg.env.families[batch_rng.next_below(cfg.env.families.size())];
      problems.push_back(generate_problem(vocab, fs.family, fs.difficulty,
                                          batch_rng.next_below(cfg.env.train_problem_seeds)));
    }

    // Rollout + verify, one slot per (problem, pattern).
    const std::uint64_t roll_master =
        mix_seed({cfg.seed, 0x726f6c6cull, static_cast<std::uint64_t>(step)});
    std::vector<PatternGroup> groups(static_cast<std::size_t>(batch * n_pat));
    parallel_for(groups.size(), workers, [&](std::size_t idx) {
      const int b = static_cast<int>(idx) / n_pat;
      const int j = static_cast<int>(idx) % n_pat;
      SequenceRun<Real> run(cfg.arch, mirror);
      const Problem& prob = problems[static_cast<std::size_t>(b)];
      const Pattern& pat = active.at(j);
      const std::uint64_t gseed = mix_seed({roll_master, static_cast<std::uint64_t>(b), prob.id,
                                            static_cast<std::uint64_t>(pat.index)});
      PatternGroup g =
          rollout_group(run, vocab, prob, pat, m, tc.temperature, tc.max_new_tokens, gseed);
      score_group(g, vocab, prob);
      groups[idx] = std::move(g);
    });

    // Selection and update-row assembly, per problem.
    StepMetrics sm;
    sm.step = step;
    sm.chosen_histogram.assign(static_cast<std::size_t>(n_pat), 0);
    double reward_sum = 0.0;
    std::size_t reward_count = 0;
    std::vector<UpdateRow> rows;
    std::vector<std::size_t> problem_row_end(static_cast<std::size_t>(batch), 0);

    for (int b = 0; b < batch; ++b) {
      const Problem& prob = problems[static_cast<std::size_t>(b)];
      SelectionRecord rec;
      rec.step = step;
      rec.problem_id = prob.id;
      rec.family = family_name(prob.family);
      std::vector<PatternStats> stats;
      stats.reserve(static_cast<std::size_t>(n_pat));
      for (int j = 0; j < n_pat; ++j) {
        const PatternGroup& g = groups[static_cast<std::size_t>(b * n_pat + j)];
        PatternStats st = pattern_accuracy(g);
        rec.correct.push_back(st.correct);
        rec.total.push_back(st.total);
        for (const Trajectory& t : g.members) {
          reward_sum += static_cast<double>(t.reward.value());
          reward_count += 1;
        }
        stats.push_back(st);
      }

      std::vector<int> update_groups;
      if (use_selection) {
        SelectionResult sel = select_optimal(stats, active.adaptive_index());
        rec.selected = sel.selected_pattern;
        rec.tie_break = sel.tie_break;
        rec.skip = sel.skip;
        if (sel.skip) {
          sm.skipped += 1;
        } else {
          update_groups.push_back(sel.selected_pattern);
          sm.chosen_histogram[static_cast<std::size_t>(sel.selected_pattern)] += 1;
        }
      } else if (algo == Algorithm::grpo) {
        update_groups.push_back(0);
        sm.chosen_histogram[0] += 1;
      } else {  // all pattern groups, no selection
        for (int j = 0; j < n_pat; ++j) update_groups.push_back(j);
      }

      for (int j : update_groups) {
        const PatternGroup& g = groups[static_cast<std::size_t>(b * n_pat + j)];
        std::vector<double> rewards;
        rewards.reserve(g.members.size());
        for (const Trajectory& t : g.members) rewards.push_back(static_cast<double>(t.reward.value()));
        AdvantageSet adv = advantages(rewards, clip.norm_eps);
        for (std::size_t kk = 0; kk < g.members.size(); ++kk) {
          const Trajectory& t = g.members[kk];
          UpdateRow ur;
          ur.row.prompt_len = t.prompt_len;
          ur.row.suffix_len = t.suffix_len;
          ur.row.tokens = prob.prompt;
          const Pattern& pat = active.at(j);
          ur.row.tokens.insert(ur.row.tokens.end(), pat.suffix.begin(), pat.suffix.end());
          ur.row.tokens.insert(ur.row.tokens.end(), t.response.begin(), t.response.end());
          ur.old_logprobs = t.logprobs;  // rollout baseline; maybe overwritten below
          ur.advantage = adv.values[kk];
          rows.push_back(std::move(ur));
        }
      }
      problem_row_end[static_cast<std::size_t>(b)] = rows.size();
      out.logs.selections.push_back(std::move(rec));
    }

    // Update-time visibility for the whole batch.
    if (!rows.empty()) {
      TokenBatch tb;
      tb.response_budget = tc.max_new_tokens;
      for (const UpdateRow& ur : rows) {
        tb.prompt_budget = std::max(tb.prompt_budget, ur.row.prompt_len + ur.row.suffix_len);
        tb.rows.push_back(ur.row);
      }
      SuffixMask mask = masked ? build_suffix_mask(vocab, tb) : all_visible_mask(vocab, tb);
      for (std::size_t i = 0; i < rows.size(); ++i) rows[i].visible = std::move(mask.rows[i]);

      // Old-policy log-probs under the update-time mask, frozen before any
      // minibatch moves the parameters.
      if (clip.ratio_baseline == RatioBaseline::masked_recompute) {
        parallel_for(rows.size(), workers, [&](std::size_t i) {
          SequenceRun<Real> run(cfg.arch, mirror);
          std::vector<double> lp;
          masked_response_logprobs(run, rows[i], lp);
          rows[i].old_logprobs = std::move(lp);
        });
      }
    }

    // Minibatch updates over problem chunks, batch order.
    double w_obj = 0.0, w_surr = 0.0, w_kl = 0.0, w_ratio = 0.0, w_clipf = 0.0, w_gn = 0.0;
    std::size_t w_sum = 0;
    const int mb_count = batch / mb_problems;
    for (int mb = 0; mb < mb_count; ++mb) {
      const int p_first = mb * mb_problems;
      const int p_last = p_first + mb_problems;  // exclusive
      const std::size_t r_first =
          p_first == 0 ? 0 : problem_row_end[static_cast<std::size_t>(p_first - 1)];
      const std::size_t r_last = problem_row_end[static_cast<std::size_t>(p_last - 1)];
      if (r_first == r_last) continue;  // every problem in the chunk skipped
      std::vector<UpdateRow> span(rows.begin() + static_cast<std::ptrdiff_t>(r_first),
                                  rows.begin() + static_cast<std::ptrdiff_t>(r_last));
      LossReport rep =
          group_loss<Real>(cfg.arch, mirror, span, clip, use_kl ? &ref_mirror : nullptr);
      if (!traindetail::all_finite(rep.ascent_grad)) {
        sm.nonfinite += 1;
        consecutive_nonfinite += 1;
        if (consecutive_nonfinite >= 3) {
          throw StateError("train: repeated non-finite gradients at step " + std::to_string(step));
        }
        continue;
      }
      consecutive_nonfinite = 0;
      const std::size_t span_rows = r_last - r_first;
      w_obj += rep.objective * static_cast<double>(span_rows);
      w_surr += rep.surrogate * static_cast<double>(span_rows);
      w_kl += rep.kl * static_cast<double>(span_rows);
      w_ratio += rep.mean_ratio * static_cast<double>(span_rows);
      w_clipf += rep.clip_fraction * static_cast<double>(span_rows);
      w_gn += traindetail::l2_norm(rep.ascent_grad) * static_cast<double>(span_rows);
      w_sum += span_rows;
      std::vector<double> descent(rep.ascent_grad.size());
      for (std::size_t i = 0; i < descent.size(); ++i) descent[i] = -rep.ascent_grad[i];
      optimizer_step(params, descent, out.opt, clip.adamw);
      mirror.assign(params.begin(), params.end());
    }

    if (w_sum > 0) {
      const double inv = 1.0 / static_cast<double>(w_sum);
      sm.objective = w_obj * inv;
      sm.surrogate = w_surr * inv;
      sm.kl = w_kl * inv;
      sm.mean_ratio = w_ratio * inv;
      sm.clip_fraction = w_clipf * inv;
      sm.grad_norm = w_gn * inv;
    }
    sm.mean_reward = reward_count ? reward_sum / static_cast<double>(reward_count) : 0.0;
    out.logs.steps.push_back(std::move(sm));

    if (tc.eval_every > 0 && (step + 1) % tc.eval_every == 0) {
      EvalOptions eo;
      eo.k = tc.eval_k;
      eo.temperature = tc.eval_temperature;
      eo.max_new_tokens = tc.max_new_tokens;
      eo.seed = mix_seed({cfg.seed, 0x6576616cull});
      eo.workers = workers;
      EvalSnapshot snap;
      snap.step = step + 1;
      snap.report = evaluate_full(cfg.arch, mirror, vocab, full, eval_problems, eo);
      out.logs.evals.push_back(std::move(snap));
    }
  }

  out.snapshot.step = start.step + static_cast<std::uint64_t>(tc.steps);
  return out;
}

}  // namespace gpso
