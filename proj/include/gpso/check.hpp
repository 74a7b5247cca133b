#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "gpso/gradcheck.hpp"
#include "gpso/mask.hpp"
#include "gpso/model.hpp"
#include "gpso/objective.hpp"
#include "gpso/patterns.hpp"
#include "gpso/rng.hpp"
#include "gpso/tokens.hpp"

namespace gpso {

// Diagnostics shared by the check subcommand and the acceptance harness:
// finite differences against the analytic gradient of the full surrogate,
// bit-exact masking invariance, and the GPSO->GRPO reduction identity.

struct CheckOptions {
  int models = 5;          // random tiny models for the gradient suite
  bool fp32 = false;       // compute in 32-bit, relaxed tolerance
  bool sabotage = false;   // corrupt one gradient coordinate, expect detection
  std::uint64_t seed = 1;
};

struct CheckReport {
  double grad_max_rel_err = 0.0;
  double grad_tolerance = 0.0;
  bool grad_ok = false;
  bool mask_ok = false;
  bool reduction_ok = false;
  bool sabotage_requested = false;
  bool sabotage_detected = false;

  bool ok() const {
    if (!(grad_ok && mask_ok && reduction_ok)) return false;
    return !sabotage_requested || sabotage_detected;
  }
};

// Real vocabulary, smallest differentiable stack: the gradient suite needs
// parameter counts where central differences over every coordinate stay cheap.
inline ArchConfig check_arch() {
  ArchConfig a;
  a.vocab_size = default_vocab().vocab_size;
  a.context_length = 24;
  a.depth = 1;
  a.width = 8;
  a.head_count = 2;
  return a;
}

// Random update rows against a live model. Old log-probs are the model's own
// masked response log-probs plus a bounded offset, so ratios stay inside the
// clip band and the min() in the surrogate is differentiable at every probed
// point. offset_scale 0.08 keeps token ratios in [0.92, 1.08]; sequence-scope
// callers pass 0.02 so the summed gap stays inside the band too.
inline std::vector<UpdateRow> random_update_rows(const ArchConfig& arch,
                                                 const std::vector<double>& params,
                                                 const VocabSpec& vocab, Rng& rng, int row_count,
                                                 bool with_suffix, double offset_scale) {
  std::vector<UpdateRow> rows;
  SequenceRun<double> run(arch, params);
  for (int i = 0; i < row_count; ++i) {
    UpdateRow ur;
    BatchRow& r = ur.row;
    r.prompt_len = 3 + static_cast<int>(rng.next_below(3));
    r.suffix_len = with_suffix ? 2 : 0;
    const int resp = 2 + static_cast<int>(rng.next_below(4));
    const int total = r.prompt_len + r.suffix_len + resp;
    for (int p = 0; p < total; ++p) {
      int tok;
      do {
        tok = static_cast<int>(rng.next_below(static_cast<std::uint64_t>(arch.vocab_size)));
      } while (tok == vocab.pad_id);
      r.tokens.push_back(tok);
    }
    ur.visible.assign(r.tokens.size(), 1);
    for (int p = r.prompt_len; p < r.prompt_len + r.suffix_len; ++p) {
      ur.visible[static_cast<std::size_t>(p)] = 0;
    }
    masked_response_logprobs(run, ur, ur.old_logprobs);
    for (double& lp : ur.old_logprobs) lp += rng.next_range(-offset_scale, offset_scale);
    do {
      ur.advantage = rng.next_range(-2.0, 2.0);
    } while (ur.advantage == 0.0);
    rows.push_back(std::move(ur));
  }
  return rows;
}

namespace checkdetail {

template <typename Real>
double objective_at(const ArchConfig& arch, const std::vector<double>& params,
                    const std::vector<UpdateRow>& rows, const ClipConfig& clip,
                    const std::vector<double>* ref_params) {
  std::vector<Real> mirror(params.begin(), params.end());
  std::vector<Real> ref_mirror;
  const std::vector<Real>* ref = nullptr;
  if (ref_params) {
    ref_mirror.assign(ref_params->begin(), ref_params->end());
    ref = &ref_mirror;
  }
  return group_loss<Real>(arch, mirror, rows, clip, ref).objective;
}

template <typename Real>
std::vector<double> gradient_at(const ArchConfig& arch, const std::vector<double>& params,
                                const std::vector<UpdateRow>& rows, const ClipConfig& clip,
                                const std::vector<double>* ref_params) {
  std::vector<Real> mirror(params.begin(), params.end());
  std::vector<Real> ref_mirror;
  const std::vector<Real>* ref = nullptr;
  if (ref_params) {
    ref_mirror.assign(ref_params->begin(), ref_params->end());
    ref = &ref_mirror;
  }
  return group_loss<Real>(arch, mirror, rows, clip, ref).ascent_grad;
}

}  // namespace checkdetail

// 64-bit: central differences of the surrogate objective against its analytic
// gradient, h = 1e-5. 32-bit: central differences of a float objective are
// dominated by rounding noise (~1e-7 per evaluation), so the float gradient is
// checked against the FD-verified 64-bit gradient instead, denominators
// floored at 1e-3 to match the 1e-2 tolerance.
inline FdReport gradient_check(const ArchConfig& arch, const std::vector<double>& params,
                               const std::vector<UpdateRow>& rows, const ClipConfig& clip,
                               const std::vector<double>* ref_params, bool fp32,
                               std::vector<double>* grad_override = nullptr) {
  if (fp32) {
    std::vector<double> analytic =
        grad_override ? *grad_override
                      : checkdetail::gradient_at<float>(arch, params, rows, clip, ref_params);
    std::vector<double> reference =
        checkdetail::gradient_at<double>(arch, params, rows, clip, ref_params);
    FdReport rep;
    for (std::size_t i = 0; i < analytic.size(); ++i) {
      double denom = std::max(std::fabs(analytic[i]), std::fabs(reference[i]));
      if (denom < 1e-3) denom = 1e-3;
      const double rel = std::fabs(analytic[i] - reference[i]) / denom;
      if (rel > rep.max_rel_err) {
        rep.max_rel_err = rel;
        rep.worst_coord = i;
        rep.worst_analytic = analytic[i];
        rep.worst_numeric = reference[i];
      }
    }
    return rep;
  }
  std::vector<double> analytic =
      grad_override ? *grad_override
                    : checkdetail::gradient_at<double>(arch, params, rows, clip, ref_params);
  auto loss = [&](const std::vector<double>& p) {
    return checkdetail::objective_at<double>(arch, p, rows, clip, ref_params);
  };
  return finite_diff_check(loss, analytic, params, 1e-5);
}

// Bit-exact invariance to the content of masked suffix positions: mutate
// every suffix token id and require identical response log-probs, objective,
// and gradient. Returns false on the first mismatch.
inline bool masking_invariance(const ArchConfig& arch, const std::vector<double>& params,
                               const VocabSpec& vocab, Rng& rng, int batches) {
  ClipConfig clip;
  for (int b = 0; b < batches; ++b) {
    std::vector<UpdateRow> rows = random_update_rows(arch, params, vocab, rng, 3, true, 0.08);
    LossReport before = group_loss<double>(arch, params, rows, clip, nullptr);
    SequenceRun<double> run(arch, params);
    std::vector<std::vector<double>> lp_before(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
      masked_response_logprobs(run, rows[i], lp_before[i]);
    }
    for (UpdateRow& ur : rows) {
      for (int p = ur.row.prompt_len; p < ur.row.prompt_len + ur.row.suffix_len; ++p) {
        int tok;
        do {
          tok = static_cast<int>(rng.next_below(static_cast<std::uint64_t>(arch.vocab_size)));
        } while (tok == vocab.pad_id || tok == ur.row.tokens[static_cast<std::size_t>(p)]);
        ur.row.tokens[static_cast<std::size_t>(p)] = tok;
      }
    }
    LossReport after = group_loss<double>(arch, params, rows, clip, nullptr);
    for (std::size_t i = 0; i < rows.size(); ++i) {
      std::vector<double> lp_after;
      masked_response_logprobs(run, rows[i], lp_after);
      if (lp_after != lp_before[i]) return false;
    }
    if (after.objective != before.objective || after.surrogate != before.surrogate) return false;
    if (after.ascent_grad != before.ascent_grad) return false;
  }
  return true;
}

// GPSO on a single empty-suffix pattern group must equal GRPO on the same
// group bit-exactly, with the masks built through their separate entry points.
inline bool reduction_identity(const ArchConfig& arch, const VocabSpec& vocab, Rng& rng,
                               int batches) {
  ClipConfig clip;
  for (int b = 0; b < batches; ++b) {
    PolicySnapshot snap = init_policy(arch, rng.next_u64());
    std::vector<UpdateRow> rows = random_update_rows(arch, snap.params, vocab, rng, 4, false, 0.08);
    TokenBatch tb;
    tb.response_budget = 8;
    for (const UpdateRow& ur : rows) {
      tb.prompt_budget = std::max(tb.prompt_budget, ur.row.prompt_len);
      tb.rows.push_back(ur.row);
    }
    SuffixMask gpso_mask = build_suffix_mask(vocab, tb);     // empty suffix: all visible
    SuffixMask grpo_mask = all_visible_mask(vocab, tb);
    std::vector<UpdateRow> gpso_rows = rows, grpo_rows = rows;
    for (std::size_t i = 0; i < rows.size(); ++i) {
      gpso_rows[i].visible = gpso_mask.rows[i];
      grpo_rows[i].visible = grpo_mask.rows[i];
    }
    LossReport g = gpso_loss<double>(arch, snap.params, gpso_rows, clip, nullptr, false);
    LossReport r = grpo_loss<double>(arch, snap.params, grpo_rows, clip, nullptr);
    if (g.objective != r.objective || g.surrogate != r.surrogate || g.kl != r.kl) return false;
    if (g.ascent_grad != r.ascent_grad) return false;
  }
  return true;
}

// The full diagnostic battery. Gradient models alternate ratio scope and KL
// on/off so every surrogate code path meets the finite-difference oracle.
inline CheckReport run_check_suite(const CheckOptions& opt) {
  CheckReport rep;
  rep.grad_tolerance = opt.fp32 ? 1e-2 : 1e-4;
  rep.sabotage_requested = opt.sabotage;
  const VocabSpec vocab = default_vocab();
  const ArchConfig arch = check_arch();
  Rng rng(mix_seed({0x6368656bull, opt.seed}));

  for (int i = 0; i < opt.models; ++i) {
    PolicySnapshot snap = init_policy(arch, rng.next_u64());
    PolicySnapshot ref = init_policy(arch, rng.next_u64());
    ClipConfig clip;
    clip.ratio_scope = (i % 2 == 0) ? RatioScope::token : RatioScope::sequence;
    clip.kl_beta = (i % 4 < 2) ? 0.0 : 0.04;
    const double offset = clip.ratio_scope == RatioScope::token ? 0.08 : 0.02;
    std::vector<UpdateRow> rows =
        random_update_rows(arch, snap.params, vocab, rng, 4, i % 3 == 0, offset);
    const std::vector<double>* refp = clip.kl_beta > 0.0 ? &ref.params : nullptr;
    FdReport fd = gradient_check(arch, snap.params, rows, clip, refp, opt.fp32);
    if (fd.max_rel_err > rep.grad_max_rel_err) rep.grad_max_rel_err = fd.max_rel_err;

    if (opt.sabotage && i == 0) {
      std::vector<double> broken =
          opt.fp32 ? checkdetail::gradient_at<float>(arch, snap.params, rows, clip, refp)
                   : checkdetail::gradient_at<double>(arch, snap.params, rows, clip, refp);
      std::size_t worst = 0;
      for (std::size_t c = 1; c < broken.size(); ++c) {
        if (std::fabs(broken[c]) > std::fabs(broken[worst])) worst = c;
      }
      broken[worst] = 0.0;
      FdReport sab = gradient_check(arch, snap.params, rows, clip, refp, opt.fp32, &broken);
      rep.sabotage_detected = sab.max_rel_err > rep.grad_tolerance;
    }
  }
  rep.grad_ok = rep.grad_max_rel_err < rep.grad_tolerance;

  PolicySnapshot mask_snap = init_policy(arch, rng.next_u64());
  rep.mask_ok = masking_invariance(arch, mask_snap.params, vocab, rng, 5);
  rep.reduction_ok = reduction_identity(arch, vocab, rng, 5);
  return rep;
}

}  // namespace gpso
