#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "gpso/train.hpp"

namespace gpso {

inline const std::vector<std::string>& ablation_labels() {
  static const std::vector<std::string> labels = {"gpso", "gpso_kl", "grpo", "gpso_no_ops",
                                                  "gpso_no_mask"};
  return labels;
}

// Single-toggle variants of a base configuration. The no-rollout row reduces
// the group structure to one empty-suffix pattern at the same total response
// budget per problem.
inline RunConfig ablation_variant(const RunConfig& base, const std::string& label) {
  RunConfig cfg = base;
  cfg.train.algorithm = Algorithm::gpso;
  if (label == "gpso") {
    return cfg;
  }
  if (label == "gpso_kl") {
    cfg.train.clip.kl_beta = base.train.clip.kl_beta > 0.0 ? base.train.clip.kl_beta : 0.04;
    return cfg;
  }
  if (label == "grpo") {
    cfg.train.algorithm = Algorithm::grpo;
    const int n_active = static_cast<int>(base.train.patterns.size());
    cfg.train.patterns = {"adaptive"};
    cfg.train.rollouts_per_pattern = base.train.rollouts_per_pattern * n_active;
    return cfg;
  }
  if (label == "gpso_no_ops") {
    cfg.train.algorithm = Algorithm::gpso_no_ops;
    return cfg;
  }
  if (label == "gpso_no_mask") {
    cfg.train.algorithm = Algorithm::gpso_no_mask;
    return cfg;
  }
  throw ConfigError("ablation: unknown row label '" + label + "'");
}

struct AblationRow {
  std::string label;
  std::uint64_t seed = 0;
  double eval_pass1 = 0.0;          // held-out, no suffix, the deployment score
  double final_train_reward = 0.0;  // mean rollout reward at the last step
  std::string config_digest;
};

// Held-out no-suffix score of a finished snapshot.
template <typename Real>
double deployment_pass1(const RunConfig& cfg, const PolicySnapshot& snapshot, int workers) {
  const VocabSpec vocab = default_vocab();
  std::vector<Real> mirror(snapshot.params.begin(), snapshot.params.end());
  EvalOptions eo;
  eo.k = cfg.train.eval_k;
  eo.temperature = cfg.train.eval_temperature;
  eo.max_new_tokens = cfg.train.max_new_tokens;
  eo.seed = mix_seed({cfg.seed, 0x6576616cull});
  eo.workers = workers;
  return evaluate_pass1(cfg.arch, mirror, vocab, make_eval_problems(vocab, cfg.env),
                        full_patterns(vocab), eo);
}

// All five rows for each seed, sharing one warm start per seed. Row order is
// label-major within a seed so the table groups naturally.
template <typename Real>
std::vector<AblationRow> run_ablation_matrix(const RunConfig& base,
                                             const std::vector<std::uint64_t>& seeds, int workers) {
  validate_run_config(base);
  if (seeds.empty()) throw ConfigError("ablation: at least one seed required");
  std::vector<AblationRow> rows;
  for (std::uint64_t seed : seeds) {
    RunConfig seeded = base;
    seeded.seed = seed;
    PolicySnapshot warm = warmstarted_policy<Real>(seeded, nullptr);
    for (const std::string& label : ablation_labels()) {
      RunConfig cfg = ablation_variant(seeded, label);
      validate_run_config(cfg);
      TrainOutput t = train<Real>(cfg, warm, workers);
      AblationRow row;
      row.label = label;
      row.seed = seed;
      row.eval_pass1 = deployment_pass1<Real>(cfg, t.snapshot, workers);
      row.final_train_reward = t.logs.steps.empty() ? 0.0 : t.logs.steps.back().mean_reward;
      row.config_digest = config_digest(cfg);
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

}  // namespace gpso
