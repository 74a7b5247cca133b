#pragma once

#include <cmath>
#include <memory>
#include <string>
#include <vector>

#include "gpso/adamw.hpp"
#include "gpso/advantage.hpp"
#include "gpso/arch.hpp"
#include "gpso/mask.hpp"
#include "gpso/model.hpp"

namespace gpso {

// Importance ratios per response token, or one per trajectory.
enum class RatioScope { token, sequence };

// What counts as the old policy's log-probs: a fresh forward pass under the
// update-time mask (ratios start at exactly 1), or the literal rollout-time
// values (which diverge once the suffix is masked away).
enum class RatioBaseline { masked_recompute, rollout };

struct ClipConfig {
  double epsilon = 0.2;
  double kl_beta = 0.0;
  double norm_eps = 1e-6;  // advantage normalization floor
  RatioScope ratio_scope = RatioScope::token;
  RatioBaseline ratio_baseline = RatioBaseline::masked_recompute;
  AdamWConfig adamw;
};

inline void validate_clip(const ClipConfig& c) {
  if (!(c.epsilon > 0.0 && c.epsilon < 1.0)) throw ConfigError("clip: epsilon outside (0, 1)");
  if (c.kl_beta < 0.0) throw ConfigError("clip: kl_beta must be >= 0");
  if (c.norm_eps < 0.0) throw ConfigError("clip: norm_eps must be >= 0");
  validate_adamw(c.adamw);
}

// min(ratio * A, clip(ratio, 1-eps, 1+eps) * A) plus the pass-through weight:
// A where the unclipped branch is active (ties included), 0 where clipping
// makes the objective locally constant in the ratio.
struct SurrogateTerm {
  double objective = 0.0;
  double passthrough = 0.0;
};

inline SurrogateTerm clipped_surrogate(double ratio, double advantage, double epsilon) {
  const double clipped = std::min(std::max(ratio, 1.0 - epsilon), 1.0 + epsilon);
  const double u = ratio * advantage;
  const double c = clipped * advantage;
  SurrogateTerm t;
  if (u <= c) {
    t.objective = u;
    t.passthrough = advantage;
  } else {
    t.objective = c;
    t.passthrough = 0.0;
  }
  return t;
}

// k3 estimator of KL(pi_theta || pi_ref) at one token:
//   exp(ref - cur) - (ref - cur) - 1, nonnegative for any inputs.
inline double kl_k3(double cur_logprob, double ref_logprob) {
  const double d = ref_logprob - cur_logprob;
  return std::expm1(d) - d;
}

// One trajectory prepared for the update: layout, visibility, frozen old
// log-probs, and its group-normalized advantage.
struct UpdateRow {
  BatchRow row;
  std::vector<std::uint8_t> visible;
  std::vector<double> old_logprobs;  // per response token
  double advantage = 0.0;
};

struct LossReport {
  double objective = 0.0;   // surrogate - kl_beta * kl, the maximized value
  double surrogate = 0.0;
  double kl = 0.0;
  double mean_ratio = 0.0;
  double clip_fraction = 0.0;  // response tokens in the clip-blocked regime
  bool skipped = false;
  std::vector<double> ascent_grad;  // d objective / d params, 64-bit
};

// Response log-probs of a row under the run's parameters, conditioned per
// `visible`. This is the one code path for both the old-policy baseline and
// the update-time recompute, so the two agree bit-exactly at step start.
template <typename Real>
inline void masked_response_logprobs(SequenceRun<Real>& run, const UpdateRow& ur,
                                     std::vector<double>& out) {
  const BatchRow& r = ur.row;
  if (ur.visible.size() != r.tokens.size()) throw InputError("loss: mask/row length mismatch");
  run.reset();
  for (std::size_t p = 0; p < r.tokens.size(); ++p) {
    run.append(r.tokens[p], ur.visible[p] != 0);
  }
  out.clear();
  const int start = r.response_start();
  for (int j = 0; j < r.response_len(); ++j) {
    const int pos = start + j;  // token at `pos`, predicted from pos-1
    out.push_back(static_cast<double>(
        run.logprobs_at(pos - 1)[r.tokens[static_cast<std::size_t>(pos)]]));
  }
}

// Group-restricted clipped objective over one set of trajectories sharing a
// problem. Token scope: per-trajectory mean over response tokens, then mean
// over trajectories. Sequence scope: one ratio per trajectory from the summed
// log-prob gap, no length normalization. The returned gradient points uphill
// (gradient ascent direction); pass its negation to optimizer_step.
//
// Response tokens that are literal PAD (mask 0 inside the response span) are
// excluded from ratios, averages, and gradients.
template <typename Real>
LossReport group_loss(const ArchConfig& arch, const std::vector<Real>& params,
                      const std::vector<UpdateRow>& rows, const ClipConfig& cfg,
                      const std::vector<Real>* ref_params) {
  validate_clip(cfg);
  if (rows.empty()) throw InputError("group_loss: no rows");
  if (cfg.kl_beta > 0.0 && ref_params == nullptr) {
    throw ConfigError("group_loss: kl_beta > 0 requires reference parameters");
  }

  LossReport rep;
  std::vector<Real> grad(params.size(), Real(0));
  SequenceRun<Real> run(arch, params);
  SequenceRun<Real>* ref_run = nullptr;
  std::vector<Real> ref_params_local;
  std::unique_ptr<SequenceRun<Real>> ref_run_owner;
  if (cfg.kl_beta > 0.0) {
    ref_run_owner = std::make_unique<SequenceRun<Real>>(arch, *ref_params);
    ref_run = ref_run_owner.get();
  }

  std::vector<double> new_lp, ref_lp;
  std::vector<Real> weights;
  const double inv_rows = 1.0 / static_cast<double>(rows.size());
  std::size_t ratio_count = 0;
  std::size_t blocked_count = 0;
  double ratio_sum = 0.0;

  for (const UpdateRow& ur : rows) {
    const BatchRow& r = ur.row;
    if (static_cast<int>(ur.old_logprobs.size()) != r.response_len()) {
      throw InputError("group_loss: old log-prob length mismatch");
    }
    masked_response_logprobs(run, ur, new_lp);
    if (ref_run) masked_response_logprobs(*ref_run, ur, ref_lp);

    // Active (non-PAD) response token positions.
    const int start = r.response_start();
    std::vector<int> active;
    for (int j = 0; j < r.response_len(); ++j) {
      if (ur.visible[static_cast<std::size_t>(start + j)] != 0) active.push_back(j);
    }
    if (active.empty()) throw InputError("group_loss: row has no active response tokens");
    const double inv_len = 1.0 / static_cast<double>(active.size());

    weights.assign(r.tokens.size(), Real(0));
    double row_surr = 0.0;
    double row_kl = 0.0;

    if (cfg.ratio_scope == RatioScope::token) {
      for (int j : active) {
        const double rho = std::exp(new_lp[static_cast<std::size_t>(j)] -
                                    ur.old_logprobs[static_cast<std::size_t>(j)]);
        const SurrogateTerm t = clipped_surrogate(rho, ur.advantage, cfg.epsilon);
        row_surr += t.objective * inv_len;
        ratio_sum += rho;
        ratio_count += 1;
        if (t.passthrough == 0.0 && ur.advantage != 0.0) blocked_count += 1;
        // d objective / d new_lp = passthrough * rho (chain rule through exp).
        double w = t.passthrough * rho * inv_len * inv_rows;
        if (ref_run && cfg.kl_beta > 0.0) {
          const double delta = ref_lp[static_cast<std::size_t>(j)] - new_lp[static_cast<std::size_t>(j)];
          row_kl += (std::expm1(delta) - delta) * inv_len;
          // d(-beta * k3)/d new_lp = beta * expm1(delta).
          w += cfg.kl_beta * std::expm1(delta) * inv_len * inv_rows;
        }
        if (w != 0.0) weights[static_cast<std::size_t>(start + j - 1)] = static_cast<Real>(w);
      }
    } else {
      double lp_gap = 0.0;
      for (int j : active) {
        lp_gap += new_lp[static_cast<std::size_t>(j)] - ur.old_logprobs[static_cast<std::size_t>(j)];
      }
      const double rho = std::exp(lp_gap);
      const SurrogateTerm t = clipped_surrogate(rho, ur.advantage, cfg.epsilon);
      row_surr = t.objective;
      ratio_sum += rho;
      ratio_count += 1;
      if (t.passthrough == 0.0 && ur.advantage != 0.0) blocked_count += static_cast<std::size_t>(active.size());
      const double w_surr = t.passthrough * rho * inv_rows;
      for (int j : active) {
        double w = w_surr;
        if (ref_run && cfg.kl_beta > 0.0) {
          const double delta = ref_lp[static_cast<std::size_t>(j)] - new_lp[static_cast<std::size_t>(j)];
          row_kl += (std::expm1(delta) - delta) * inv_len;
          w += cfg.kl_beta * std::expm1(delta) * inv_len * inv_rows;
        }
        if (w != 0.0) weights[static_cast<std::size_t>(start + j - 1)] = static_cast<Real>(w);
      }
    }

    rep.surrogate += row_surr * inv_rows;
    rep.kl += row_kl * inv_rows;
    bool any_weight = false;
    for (Real w : weights) {
      if (w != Real(0)) { any_weight = true; break; }
    }
    if (any_weight) run.backward(weights, grad);
  }

  rep.objective = rep.surrogate - cfg.kl_beta * rep.kl;
  rep.mean_ratio = ratio_count ? ratio_sum / static_cast<double>(ratio_count) : 0.0;
  rep.clip_fraction = ratio_count ? static_cast<double>(blocked_count) / static_cast<double>(ratio_count) : 0.0;
  rep.ascent_grad.assign(params.size(), 0.0);
  for (std::size_t i = 0; i < grad.size(); ++i) rep.ascent_grad[i] = static_cast<double>(grad[i]);
  return rep;
}

// GRPO: the degenerate single-group case. Provided as its own entry point so
// the reduction identity (one pattern, empty suffix) is a visible contract.
template <typename Real>
LossReport grpo_loss(const ArchConfig& arch, const std::vector<Real>& params,
                     const std::vector<UpdateRow>& rows, const ClipConfig& cfg,
                     const std::vector<Real>* ref_params) {
  return group_loss(arch, params, rows, cfg, ref_params);
}

// GPSO: the selected pattern's group under the suffix mask. A skip flag (or a
// zero-variance group, which arrives as all-zero advantages) contributes no
// gradient and is marked skipped.
template <typename Real>
LossReport gpso_loss(const ArchConfig& arch, const std::vector<Real>& params,
                     const std::vector<UpdateRow>& rows, const ClipConfig& cfg,
                     const std::vector<Real>* ref_params, bool selection_skip) {
  bool all_zero_adv = true;
  for (const UpdateRow& r : rows) {
    if (r.advantage != 0.0) { all_zero_adv = false; break; }
  }
  if (selection_skip || all_zero_adv) {
    LossReport rep;
    rep.skipped = true;
    rep.ascent_grad.assign(params.size(), 0.0);
    return rep;
  }
  return group_loss(arch, params, rows, cfg, ref_params);
}

}  // namespace gpso
