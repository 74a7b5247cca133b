#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <vector>

#include "gpso/adamw.hpp"
#include "gpso/arch.hpp"
#include "gpso/check.hpp"
#include "gpso/mask.hpp"
#include "gpso/model.hpp"
#include "gpso/objective.hpp"
#include "gpso/rng.hpp"
#include "gpso/sampler.hpp"
#include "gpso/tokens.hpp"

using namespace gpso;

namespace {

std::vector<double> zero_params(const ArchConfig& a) {
  return std::vector<double>(param_count(a), 0.0);
}

void append_all(SequenceRun<double>& run, const std::vector<int>& toks) {
  for (int t : toks) run.append(t, true);
}

}  // namespace

TEST(Arch, ManifestCoversParams) {
  ArchConfig a;
  PolicySnapshot s = init_policy(a, 1);
  std::size_t total = 0;
  for (const ParamSegment& seg : param_manifest(a)) {
    EXPECT_EQ(seg.offset, total);
    total += seg.count();
  }
  EXPECT_EQ(total, s.params.size());
  EXPECT_EQ(total, param_count(a));
}

TEST(Arch, InitSeedScoped) {
  ArchConfig a = check_arch();
  PolicySnapshot s1 = init_policy(a, 1);
  PolicySnapshot s2 = init_policy(a, 1);
  PolicySnapshot s3 = init_policy(a, 2);
  EXPECT_EQ(s1.params, s2.params);
  ASSERT_EQ(s1.params.size(), s3.params.size());
  std::size_t diff = 0;
  for (std::size_t i = 0; i < s1.params.size(); ++i) {
    if (s1.params[i] != s3.params[i]) ++diff;
  }
  EXPECT_GT(diff, s1.params.size() * 99 / 100);
}

TEST(Arch, ValidationRejectsBadShapes) {
  ArchConfig a = check_arch();
  a.width = 10;
  a.head_count = 3;
  EXPECT_THROW(validate_arch(a), ConfigError);
  ArchConfig b = check_arch();
  b.depth = 0;
  EXPECT_THROW(validate_arch(b), ConfigError);
  ArchConfig c = check_arch();
  c.context_length = 0;
  EXPECT_THROW(validate_arch(c), ConfigError);
}

TEST(Model, LogprobsNormalized) {
  ArchConfig a = check_arch();
  PolicySnapshot s = init_policy(a, 3);
  SequenceRun<double> run(a, s.params);
  append_all(run, {1, 5, 9, 17, 2});
  for (int p = 0; p < run.length(); ++p) {
    const double* lp = run.logprobs_at(p);
    double sum = 0.0;
    for (int t = 0; t < a.vocab_size; ++t) sum += std::exp(lp[t]);
    EXPECT_NEAR(sum, 1.0, 1e-12);
  }
}

TEST(Model, DeterministicAcrossRuns) {
  ArchConfig a = check_arch();
  PolicySnapshot s = init_policy(a, 4);
  SequenceRun<double> r1(a, s.params), r2(a, s.params);
  append_all(r1, {3, 7, 11, 2});
  append_all(r2, {3, 7, 11, 2});
  for (int p = 0; p < 4; ++p) {
    for (int t = 0; t < a.vocab_size; ++t) {
      EXPECT_EQ(r1.logprobs_at(p)[t], r2.logprobs_at(p)[t]);
    }
  }
  // reset replays from scratch to the same values
  r1.reset();
  append_all(r1, {3, 7, 11, 2});
  for (int t = 0; t < a.vocab_size; ++t) {
    EXPECT_EQ(r1.logprobs_at(3)[t], r2.logprobs_at(3)[t]);
  }
}

TEST(Model, InvisibleContentCannotLeak) {
  // Two sequences differing only in the token id at an invisible position
  // must produce bit-identical log-probs everywhere, its own slot included.
  ArchConfig a = check_arch();
  PolicySnapshot s = init_policy(a, 5);
  SequenceRun<double> r1(a, s.params), r2(a, s.params);
  r1.append(4, true);
  r1.append(21, false);
  r1.append(9, true);
  r1.append(1, true);
  r2.append(4, true);
  r2.append(22, false);
  r2.append(9, true);
  r2.append(1, true);
  for (int p = 0; p < 4; ++p) {
    for (int t = 0; t < a.vocab_size; ++t) {
      EXPECT_EQ(r1.logprobs_at(p)[t], r2.logprobs_at(p)[t]) << "pos " << p << " tok " << t;
    }
  }
  // A visible change at the same position does leak.
  SequenceRun<double> r3(a, s.params);
  r3.append(4, true);
  r3.append(22, true);
  r3.append(9, true);
  r3.append(1, true);
  bool any = false;
  for (int t = 0; t < a.vocab_size; ++t) {
    if (r3.logprobs_at(3)[t] != r1.logprobs_at(3)[t]) any = true;
  }
  EXPECT_TRUE(any);
}

TEST(Model, Fp32MirrorsTopology) {
  ArchConfig a = check_arch();
  PolicySnapshot s = init_policy(a, 6);
  SequenceRun<double> r64(a, s.params);
  std::vector<float> p32(s.params.begin(), s.params.end());
  SequenceRun<float> r32(a, p32);
  append_all(r64, {2, 6, 13});
  r32.append(2, true);
  r32.append(6, true);
  r32.append(13, true);
  for (int t = 0; t < a.vocab_size; ++t) {
    EXPECT_NEAR(static_cast<double>(r32.logprobs_at(2)[t]), r64.logprobs_at(2)[t], 1e-4);
  }
}

TEST(Sampler, UniformOnZeroParameters) {
  ArchConfig a = check_arch();
  std::vector<double> zp = zero_params(a);
  VocabSpec v = default_vocab();
  SequenceRun<double> run(a, zp);
  std::map<int, int> counts;
  const int n = 20000;
  for (int i = 0; i < n; ++i) {
    run.reset();
    run.append(3, true);
    SampleResult r = sample_response(run, v, 1.0, 1, static_cast<std::uint64_t>(i) + 1);
    ASSERT_EQ(r.tokens.size(), 1u);
    counts[r.tokens[0]] += 1;
    // untempered log-prob is over the full vocab, PAD included
    EXPECT_NEAR(r.logprobs[0], -std::log(static_cast<double>(a.vocab_size)), 1e-12);
  }
  EXPECT_EQ(counts.count(v.pad_id), 0u);
  const double p = 1.0 / (a.vocab_size - 1);
  const double sigma = std::sqrt(p * (1 - p) * n);
  for (int t = 0; t < a.vocab_size; ++t) {
    if (t == v.pad_id) continue;
    EXPECT_NEAR(counts[t], n * p, 3.5 * sigma) << "token " << t;
  }
}

TEST(Sampler, GreedyIsArgmaxLowestIdTie) {
  ArchConfig a = check_arch();
  std::vector<double> zp = zero_params(a);
  VocabSpec v = default_vocab();
  SequenceRun<double> run(a, zp);
  run.append(3, true);
  SampleResult r = sample_response(run, v, 0.0, 1, 999);
  EXPECT_EQ(r.tokens[0], 0);  // all logits tie; lowest non-PAD id wins

  PolicySnapshot s = init_policy(a, 7);
  SequenceRun<double> ri(a, s.params);
  ri.reset();
  ri.append(3, true);
  const double* lp = ri.logprobs_at(0);
  int best = -1;
  for (int t = 0; t < a.vocab_size; ++t) {
    if (t == v.pad_id) continue;
    if (best < 0 || lp[t] > lp[best]) best = t;
  }
  ri.reset();
  ri.append(3, true);
  SampleResult g = sample_response(ri, v, 0.0, 1, 1);
  EXPECT_EQ(g.tokens[0], best);
}

TEST(Sampler, TemperatureReshapesDistribution) {
  ArchConfig a = check_arch();
  PolicySnapshot s = init_policy(a, 8);
  VocabSpec v = default_vocab();
  SequenceRun<double> probe(a, s.params);
  probe.append(5, true);
  std::vector<double> lp(static_cast<std::size_t>(a.vocab_size));
  for (int t = 0; t < a.vocab_size; ++t) lp[static_cast<std::size_t>(t)] = probe.logprobs_at(0)[t];

  const double T = 0.6;
  std::vector<double> want(lp.size(), 0.0);
  double total = 0.0;
  for (int t = 0; t < a.vocab_size; ++t) {
    if (t == v.pad_id) continue;
    want[static_cast<std::size_t>(t)] = std::exp(lp[static_cast<std::size_t>(t)] / T);
    total += want[static_cast<std::size_t>(t)];
  }
  for (double& w : want) w /= total;

  const int n = 20000;
  std::vector<int> counts(lp.size(), 0);
  SequenceRun<double> run(a, s.params);
  for (int i = 0; i < n; ++i) {
    run.reset();
    run.append(5, true);
    SampleResult r = sample_response(run, v, T, 1, static_cast<std::uint64_t>(i) + 77);
    counts[static_cast<std::size_t>(r.tokens[0])] += 1;
    EXPECT_EQ(r.logprobs[0], lp[static_cast<std::size_t>(r.tokens[0])]);
  }
  for (int t = 0; t < a.vocab_size; ++t) {
    double freq = static_cast<double>(counts[static_cast<std::size_t>(t)]) / n;
    EXPECT_NEAR(freq, want[static_cast<std::size_t>(t)], 0.015) << "token " << t;
  }
}

TEST(Sampler, TerminationAndRescoring) {
  ArchConfig a = check_arch();
  PolicySnapshot s = init_policy(a, 9);
  VocabSpec v = default_vocab();
  SequenceRun<double> run(a, s.params);
  for (std::uint64_t seed = 1; seed <= 40; ++seed) {
    run.reset();
    append_all(run, {2, 8, 14});
    SampleResult r = sample_response(run, v, 1.0, 4, seed);
    ASSERT_GE(r.tokens.size(), 1u);
    ASSERT_LE(r.tokens.size(), 4u);
    ASSERT_EQ(r.logprobs.size(), r.tokens.size());
    for (std::size_t i = 0; i < r.tokens.size(); ++i) {
      EXPECT_NE(r.tokens[i], v.pad_id);
      if (i + 1 < r.tokens.size()) EXPECT_NE(r.tokens[i], v.eos_id);
    }
    if (r.tokens.back() == v.eos_id) {
      EXPECT_FALSE(r.truncated);
    } else {
      EXPECT_TRUE(r.truncated);
      EXPECT_EQ(r.tokens.size(), 4u);
    }
    // Update-time rescoring of the same context reproduces the recorded
    // log-probs bit for bit.
    UpdateRow ur;
    ur.row.tokens = {2, 8, 14};
    ur.row.tokens.insert(ur.row.tokens.end(), r.tokens.begin(), r.tokens.end());
    ur.row.prompt_len = 3;
    ur.row.suffix_len = 0;
    ur.visible.assign(ur.row.tokens.size(), 1);
    std::vector<double> again;
    SequenceRun<double> rescore(a, s.params);
    masked_response_logprobs(rescore, ur, again);
    EXPECT_EQ(again, r.logprobs);
  }
}

TEST(Mask, SuffixAndPadHidden) {
  VocabSpec v = default_vocab();
  TokenBatch b;
  b.prompt_budget = 10;
  b.response_budget = 8;
  BatchRow r;
  r.tokens = {1, 2, v.pad_id, 4, 5, 21, 22, 21, 6, 7, 8, 9, 10, 15};
  r.prompt_len = 5;
  r.suffix_len = 3;
  b.rows.push_back(r);
  SuffixMask m = build_suffix_mask(v, b);
  ASSERT_EQ(m.rows.size(), 1u);
  std::vector<std::uint8_t> want = {1, 1, 0, 1, 1, 0, 0, 0, 1, 1, 1, 1, 1, 1};
  EXPECT_EQ(m.rows[0], want);
  SuffixMask av = all_visible_mask(v, b);
  std::vector<std::uint8_t> want_av = {1, 1, 0, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1};
  EXPECT_EQ(av.rows[0], want_av);
}

TEST(Mask, ValidationRejectsBadRows) {
  VocabSpec v = default_vocab();
  TokenBatch b;
  b.prompt_budget = 4;
  b.response_budget = 3;
  BatchRow r;
  r.tokens = {1, 2, 3, 4};
  r.prompt_len = 2;
  r.suffix_len = 0;
  b.rows.push_back(r);
  EXPECT_NO_THROW(validate_batch(b));

  TokenBatch bad = b;
  bad.rows[0].prompt_len = 0;
  EXPECT_THROW(validate_batch(bad), InputError);
  bad = b;
  bad.rows[0].suffix_len = 3;  // prompt 2 + suffix 3 > budget 4, and response empty
  EXPECT_THROW(validate_batch(bad), InputError);
  bad = b;
  bad.rows[0].tokens = {1, 2};  // no response
  EXPECT_THROW(validate_batch(bad), InputError);
  bad = b;
  bad.rows[0].tokens = {1, 2, 3, 4, 5, 6};  // response 4 > budget 3
  EXPECT_THROW(validate_batch(bad), InputError);
  bad = b;
  bad.prompt_budget = 0;
  EXPECT_THROW(validate_batch(bad), ConfigError);
}

TEST(Objective, ClippedSurrogateBranches) {
  SurrogateTerm t = clipped_surrogate(1.5, 1.0, 0.2);
  EXPECT_DOUBLE_EQ(t.objective, 1.2);
  EXPECT_DOUBLE_EQ(t.passthrough, 0.0);

  t = clipped_surrogate(1.5, -1.0, 0.2);
  EXPECT_DOUBLE_EQ(t.objective, -1.5);
  EXPECT_DOUBLE_EQ(t.passthrough, -1.0);

  t = clipped_surrogate(0.7, 1.0, 0.2);
  EXPECT_DOUBLE_EQ(t.objective, 0.7);
  EXPECT_DOUBLE_EQ(t.passthrough, 1.0);

  t = clipped_surrogate(0.7, -1.0, 0.2);
  EXPECT_DOUBLE_EQ(t.objective, -0.8);
  EXPECT_DOUBLE_EQ(t.passthrough, 0.0);

  t = clipped_surrogate(1.0, 0.37, 0.2);
  EXPECT_DOUBLE_EQ(t.objective, 0.37);
  EXPECT_DOUBLE_EQ(t.passthrough, 0.37);

  // exact boundary counts as unclipped
  t = clipped_surrogate(1.2, 1.0, 0.2);
  EXPECT_DOUBLE_EQ(t.objective, 1.2);
  EXPECT_DOUBLE_EQ(t.passthrough, 1.0);
}

TEST(Objective, Kl3Values) {
  EXPECT_DOUBLE_EQ(kl_k3(-1.3, -1.3), 0.0);
  const double ln2 = std::log(2.0);
  EXPECT_NEAR(kl_k3(-2.0, -2.0 + ln2), 1.0 - ln2, 1e-15);
  EXPECT_NEAR(kl_k3(-2.0, -2.0 - ln2), -0.5 + ln2, 1e-15);
  Rng rng(31);
  for (int i = 0; i < 1000; ++i) {
    double cur = -5.0 * rng.next_double();
    double ref = -5.0 * rng.next_double();
    EXPECT_GE(kl_k3(cur, ref), 0.0);
  }
}

TEST(Objective, BlockedRegimeHasZeroGradient) {
  ArchConfig a = check_arch();
  VocabSpec v = default_vocab();
  PolicySnapshot s = init_policy(a, 10);
  Rng rng(404);
  std::vector<UpdateRow> rows = random_update_rows(a, s.params, v, rng, 6, true, 0.0);
  const double push = std::log(1.3);
  for (UpdateRow& ur : rows) {
    for (double& lp : ur.old_logprobs) lp += ur.advantage > 0 ? -push : push;
  }
  ClipConfig cfg;
  LossReport rep = group_loss<double>(a, s.params, rows, cfg, nullptr);
  EXPECT_DOUBLE_EQ(rep.clip_fraction, 1.0);
  for (double g : rep.ascent_grad) EXPECT_EQ(g, 0.0);
  double want = 0.0;
  for (const UpdateRow& ur : rows) {
    want += ur.advantage * (ur.advantage > 0 ? 1.2 : 0.8);
  }
  want /= static_cast<double>(rows.size());
  EXPECT_NEAR(rep.objective, want, 1e-12);

  // The objective is locally constant: nudging the parameters cannot move it
  // while every token stays clipped.
  std::vector<double> nudged = s.params;
  Rng prng(405);
  for (double& p : nudged) p += 1e-7 * (prng.next_double() - 0.5);
  LossReport rep2 = group_loss<double>(a, nudged, rows, cfg, nullptr);
  EXPECT_EQ(rep2.objective, rep.objective);
  for (double g : rep2.ascent_grad) EXPECT_EQ(g, 0.0);
}

TEST(Objective, InputValidation) {
  ArchConfig a = check_arch();
  VocabSpec v = default_vocab();
  PolicySnapshot s = init_policy(a, 11);
  ClipConfig cfg;
  EXPECT_THROW(group_loss<double>(a, s.params, {}, cfg, nullptr), InputError);

  Rng rng(12);
  std::vector<UpdateRow> rows = random_update_rows(a, s.params, v, rng, 1, false, 0.05);
  ClipConfig with_kl = cfg;
  with_kl.kl_beta = 0.04;
  EXPECT_THROW(group_loss<double>(a, s.params, rows, with_kl, nullptr), ConfigError);

  std::vector<UpdateRow> short_lp = rows;
  short_lp[0].old_logprobs.pop_back();
  EXPECT_THROW(group_loss<double>(a, s.params, short_lp, cfg, nullptr), InputError);

  // A row whose response is all PAD has nothing to optimize.
  UpdateRow dead;
  dead.row.tokens = {1, 2, 3, v.pad_id, v.pad_id};
  dead.row.prompt_len = 3;
  dead.row.suffix_len = 0;
  dead.visible = {1, 1, 1, 0, 0};
  dead.old_logprobs = {-1.0, -1.0};
  dead.advantage = 1.0;
  EXPECT_THROW(group_loss<double>(a, s.params, {dead}, cfg, nullptr), InputError);

  ClipConfig bad_eps = cfg;
  bad_eps.epsilon = 0.0;
  EXPECT_THROW(group_loss<double>(a, s.params, rows, bad_eps, nullptr), ConfigError);
}

TEST(Objective, KlZeroAgainstIdenticalReference) {
  ArchConfig a = check_arch();
  VocabSpec v = default_vocab();
  PolicySnapshot s = init_policy(a, 13);
  Rng rng(14);
  std::vector<UpdateRow> rows = random_update_rows(a, s.params, v, rng, 3, true, 0.08);
  ClipConfig cfg;
  cfg.kl_beta = 0.04;
  std::vector<double> ref = s.params;
  LossReport rep = group_loss<double>(a, s.params, rows, cfg, &ref);
  EXPECT_EQ(rep.kl, 0.0);
  EXPECT_EQ(rep.objective, rep.surrogate);

  PolicySnapshot other = init_policy(a, 99);
  LossReport rep2 = group_loss<double>(a, s.params, rows, cfg, &other.params);
  EXPECT_GT(rep2.kl, 0.0);
  EXPECT_LT(rep2.objective, rep2.surrogate);
}

TEST(Objective, SequenceScopeMatchesManualRecompute) {
  ArchConfig a = check_arch();
  VocabSpec v = default_vocab();
  PolicySnapshot s = init_policy(a, 15);
  Rng rng(16);
  std::vector<UpdateRow> rows = random_update_rows(a, s.params, v, rng, 1, false, 0.0);
  // Shift the frozen log-probs by known amounts; the sequence ratio is the
  // exponential of the summed gap.
  double gap = 0.0;
  for (std::size_t j = 0; j < rows[0].old_logprobs.size(); ++j) {
    double d = (j % 2 == 0) ? 0.05 : -0.02;
    rows[0].old_logprobs[j] += d;
    gap -= d;
  }
  rows[0].advantage = 1.5;
  ClipConfig cfg;
  cfg.ratio_scope = RatioScope::sequence;
  LossReport rep = group_loss<double>(a, s.params, rows, cfg, nullptr);
  const double rho = std::exp(gap);
  SurrogateTerm t = clipped_surrogate(rho, 1.5, cfg.epsilon);
  EXPECT_NEAR(rep.surrogate, t.objective, 1e-12);
  EXPECT_NEAR(rep.mean_ratio, rho, 1e-12);
}

TEST(Objective, GpsoSkipProducesNoUpdate) {
  ArchConfig a = check_arch();
  VocabSpec v = default_vocab();
  PolicySnapshot s = init_policy(a, 17);
  Rng rng(18);
  std::vector<UpdateRow> rows = random_update_rows(a, s.params, v, rng, 3, true, 0.05);
  ClipConfig cfg;
  LossReport rep = gpso_loss<double>(a, s.params, rows, cfg, nullptr, true);
  EXPECT_TRUE(rep.skipped);
  ASSERT_EQ(rep.ascent_grad.size(), s.params.size());
  for (double g : rep.ascent_grad) EXPECT_EQ(g, 0.0);

  for (UpdateRow& ur : rows) ur.advantage = 0.0;
  LossReport rep2 = gpso_loss<double>(a, s.params, rows, cfg, nullptr, false);
  EXPECT_TRUE(rep2.skipped);

  rows[0].advantage = 0.5;
  LossReport rep3 = gpso_loss<double>(a, s.params, rows, cfg, nullptr, false);
  EXPECT_FALSE(rep3.skipped);
}

TEST(Gradients, FiniteDifferenceTokenScope) {
  ArchConfig a = check_arch();
  VocabSpec v = default_vocab();
  PolicySnapshot s = init_policy(a, 19);
  Rng rng(20);
  std::vector<UpdateRow> rows = random_update_rows(a, s.params, v, rng, 3, true, 0.08);
  ClipConfig cfg;
  FdReport rep = gradient_check(a, s.params, rows, cfg, nullptr, false);
  EXPECT_LT(rep.max_rel_err, 1e-4) << "coord " << rep.worst_coord;
}

TEST(Gradients, FiniteDifferenceSequenceScopeWithKl) {
  ArchConfig a = check_arch();
  VocabSpec v = default_vocab();
  PolicySnapshot s = init_policy(a, 21);
  PolicySnapshot ref = init_policy(a, 22);
  Rng rng(23);
  std::vector<UpdateRow> rows = random_update_rows(a, s.params, v, rng, 3, true, 0.06);
  ClipConfig cfg;
  cfg.ratio_scope = RatioScope::sequence;
  cfg.kl_beta = 0.04;
  FdReport rep = gradient_check(a, s.params, rows, cfg, &ref.params, false);
  EXPECT_LT(rep.max_rel_err, 1e-4) << "coord " << rep.worst_coord;
}

TEST(Checks, MaskingInvarianceHolds) {
  ArchConfig a = check_arch();
  VocabSpec v = default_vocab();
  PolicySnapshot s = init_policy(a, 24);
  Rng rng(25);
  EXPECT_TRUE(masking_invariance(a, s.params, v, rng, 3));
}

TEST(Checks, ReductionIdentityHolds) {
  ArchConfig a = check_arch();
  VocabSpec v = default_vocab();
  Rng rng(26);
  EXPECT_TRUE(reduction_identity(a, v, rng, 3));
}

TEST(Checks, SuiteRunsClean) {
  CheckOptions opt;
  opt.models = 2;
  opt.seed = 2;
  CheckReport rep = run_check_suite(opt);
  EXPECT_TRUE(rep.grad_ok) << rep.grad_max_rel_err;
  EXPECT_TRUE(rep.mask_ok);
  EXPECT_TRUE(rep.reduction_ok);
  EXPECT_TRUE(rep.ok());
}

TEST(Checks, SabotageIsDetected) {
  CheckOptions opt;
  opt.models = 2;
  opt.seed = 2;
  opt.sabotage = true;
  CheckReport rep = run_check_suite(opt);
  EXPECT_TRUE(rep.sabotage_requested);
  EXPECT_TRUE(rep.sabotage_detected);
  EXPECT_TRUE(rep.ok());

  // An undetected sabotage must fail the report.
  CheckReport undetected = rep;
  undetected.sabotage_detected = false;
  EXPECT_FALSE(undetected.ok());
}

TEST(AdamW, BiasCorrectedStep) {
  std::vector<double> p = {1.0, -2.0};
  std::vector<double> g = {2.0, -0.5};
  AdamWState st;
  AdamWConfig cfg;
  cfg.lr = 0.01;
  optimizer_step(p, g, st, cfg);
  // First step: m_hat = g, v_hat = g^2, so the move is lr * sign(g) (within eps).
  EXPECT_NEAR(p[0], 1.0 - 0.01 * (2.0 / (2.0 + 1e-8)), 1e-12);
  EXPECT_NEAR(p[1], -2.0 + 0.01 * (0.5 / (0.5 + 1e-8)), 1e-12);
  EXPECT_EQ(st.t, 1u);
  optimizer_step(p, g, st, cfg);
  EXPECT_NEAR(p[0], 1.0 - 0.02 * (2.0 / (2.0 + 1e-8)), 1e-9);

  std::vector<double> wrong = {1.0};
  EXPECT_THROW(optimizer_step(p, wrong, st, cfg), InputError);
  AdamWConfig bad = cfg;
  bad.beta1 = 1.0;
  EXPECT_THROW(optimizer_step(p, g, st, bad), ConfigError);
}
