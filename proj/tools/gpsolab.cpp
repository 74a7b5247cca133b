// Command line front end for the lab: train a policy, evaluate a checkpoint,
// run the ablation matrix, self-check gradients, or dump raw rollouts.
//
// Exit codes: 0 success, 1 configuration or input rejection, 2 runtime
// failure (including a failed self-check).

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "gpso/ablation.hpp"
#include "gpso/check.hpp"
#include "gpso/checkpoint.hpp"
#include "gpso/config.hpp"
#include "gpso/metrics.hpp"
#include "gpso/train.hpp"

namespace {

using namespace gpso;

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct CommonArgs {
  std::string config_path;
  bool fp32 = false;
  bool fp32_set = false;
  std::uint64_t seed = 0;
  bool seed_set = false;
  int workers = 1;
};

RunConfig load_config(const CommonArgs& c) {
  RunConfig cfg;
  if (!c.config_path.empty()) cfg = parse_run_config(read_text_file(c.config_path));
  if (c.seed_set) cfg.seed = c.seed;
  if (c.fp32_set) cfg.fp32 = c.fp32;
  return cfg;
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InputError("cannot write file: " + path);
  out << text;
}

// ---- train ----

struct TrainArgs {
  CommonArgs common;
  std::string out_dir;
  int steps = -1;
  std::string algorithm;
  std::vector<std::string> patterns;
};

template <typename Real>
int run_train(RunConfig cfg, const TrainArgs& a) {
  const std::string digest = config_digest(cfg);
  std::filesystem::create_directories(a.out_dir);
  const std::string base = a.out_dir + "/";
  write_text_file(base + "config.json", canonical_dump(cfg));

  std::vector<double> nll;
  PolicySnapshot warm = warmstarted_policy<Real>(cfg, &nll);
  if (!nll.empty()) {
    std::printf("warmstart nll %.4f -> %.4f over %d epochs\n", nll.front(), nll.back(),
                cfg.train.warmstart_epochs);
  }

  TrainOutput t = train<Real>(cfg, warm, a.common.workers);

  const VocabSpec vocab = default_vocab();
  PatternSet active = active_patterns(cfg, vocab);
  {
    JsonlWriter w(base + "metrics.jsonl", digest, "metrics");
    if (!nll.empty()) w.write({{"warmstart_nll", nll}});
    for (const StepMetrics& m : t.logs.steps) w.write(to_json(m, active));
  }
  {
    JsonlWriter w(base + "selection.jsonl", digest, "selection");
    for (const SelectionRecord& r : t.logs.selections) w.write(to_json(r, active));
  }
  {
    JsonlWriter w(base + "eval.jsonl", digest, "eval");
    for (const EvalSnapshot& s : t.logs.evals) w.write(to_json(s));
  }
  Checkpoint ck;
  ck.snapshot = t.snapshot;
  ck.opt = t.opt;
  ck.has_opt = true;
  ck.config_digest = digest;
  save_checkpoint(base + "checkpoint.bin", ck);

  double tail = 0.0;
  const int window = std::min<int>(20, static_cast<int>(t.logs.steps.size()));
  for (int i = 0; i < window; ++i) {
    tail += t.logs.steps[t.logs.steps.size() - 1 - static_cast<std::size_t>(i)].mean_reward;
  }
  if (window > 0) tail /= window;
  std::printf("trained %d steps (%s), mean reward last %d steps %.3f\n", cfg.train.steps,
              algorithm_name(cfg.train.algorithm), window, tail);
  for (const EvalSnapshot& s : t.logs.evals) {
    std::printf("eval @%d: pass@1 %.3f oracle %.3f\n", s.step, s.report.adaptive_pass1,
                s.report.oracle_pass1);
  }
  std::printf("config digest %s\nwrote %sconfig.json metrics.jsonl selection.jsonl eval.jsonl "
              "checkpoint.bin\n",
              digest.c_str(), base.c_str());
  return 0;
}

int cmd_train(const TrainArgs& a) {
  RunConfig cfg = load_config(a.common);
  if (a.steps >= 0) cfg.train.steps = a.steps;
  if (!a.algorithm.empty()) cfg.train.algorithm = algorithm_from_name(a.algorithm);
  if (!a.patterns.empty()) cfg.train.patterns = a.patterns;
  validate_run_config(cfg);
  return cfg.fp32 ? run_train<float>(cfg, a) : run_train<double>(cfg, a);
}

// ---- eval ----

struct EvalArgs {
  CommonArgs common;
  std::string checkpoint_path;
  std::string report_path;
  int k = -1;
  double temperature = -1.0;
};

template <typename Real>
int run_eval(const RunConfig& cfg, const EvalArgs& a) {
  Checkpoint ck = load_checkpoint(a.checkpoint_path, config_digest(cfg));
  const VocabSpec vocab = default_vocab();
  EvalOptions opts;
  opts.k = a.k > 0 ? a.k : cfg.train.eval_k;
  opts.temperature = a.temperature >= 0.0 ? a.temperature : cfg.train.eval_temperature;
  opts.max_new_tokens = cfg.train.max_new_tokens;
  opts.seed = mix_seed({cfg.seed, 0x6576616cull});
  opts.workers = a.common.workers;
  std::vector<Problem> problems = make_eval_problems(vocab, cfg.env);
  EvalReport rep;
  if (cfg.fp32) {
    std::vector<float> params(ck.snapshot.params.begin(), ck.snapshot.params.end());
    rep = evaluate_full(cfg.arch, params, vocab, full_patterns(vocab), problems, opts);
  } else {
    rep = evaluate_full(cfg.arch, ck.snapshot.params, vocab, full_patterns(vocab), problems, opts);
  }

  std::printf("%-24s pass@1\n", "conditioning");
  for (const auto& [name, acc] : rep.fixed) std::printf("%-24s %.4f\n", name.c_str(), acc);
  std::printf("%-24s %.4f\n", "adaptive (deploy)", rep.adaptive_pass1);
  std::printf("%-24s %.4f\n", "per-sample oracle", rep.oracle_pass1);
  std::printf("by family:");
  for (const auto& [name, acc] : rep.per_family) std::printf(" %s %.4f", name.c_str(), acc);
  std::printf("\nstyle usage (no suffix):");
  for (const auto& [name, frac] : rep.usage) std::printf(" %s %.3f", name.c_str(), frac);
  std::printf("\n");

  if (!a.report_path.empty()) {
    nlohmann::json j = to_json(rep);
    j["config_digest"] = config_digest(cfg);
    write_text_file(a.report_path, j.dump(2) + "\n");
    std::printf("wrote %s\n", a.report_path.c_str());
  }
  return 0;
}

int cmd_eval(const EvalArgs& a) {
  RunConfig cfg = load_config(a.common);
  validate_run_config(cfg);
  return cfg.fp32 ? run_eval<float>(cfg, a) : run_eval<double>(cfg, a);
}

// ---- ablate ----

struct AblateArgs {
  CommonArgs common;
  std::vector<std::uint64_t> seeds;
  std::string out_path = "ablation.csv";
};

template <typename Real>
int run_ablate(const RunConfig& cfg, const AblateArgs& a) {
  std::vector<std::uint64_t> seeds = a.seeds.empty() ? std::vector<std::uint64_t>{cfg.seed} : a.seeds;
  std::vector<AblationRow> rows = run_ablation_matrix<Real>(cfg, seeds, a.common.workers);
  std::printf("%-14s %-6s %-10s %-12s\n", "variant", "seed", "pass@1", "train_reward");
  for (const AblationRow& r : rows) {
    std::printf("%-14s %-6llu %-10.4f %-12.4f\n", r.label.c_str(),
                static_cast<unsigned long long>(r.seed), r.eval_pass1, r.final_train_reward);
  }
  write_csv(a.out_path, {"algorithm", "seed", "eval_pass1", "final_train_reward", "config_digest"},
            ablation_csv_rows(rows));
  std::printf("wrote %s\n", a.out_path.c_str());
  return 0;
}

int cmd_ablate(const AblateArgs& a) {
  RunConfig cfg = load_config(a.common);
  validate_run_config(cfg);
  return cfg.fp32 ? run_ablate<float>(cfg, a) : run_ablate<double>(cfg, a);
}

// ---- check ----

struct CheckArgs {
  int models = 5;
  bool fp32 = false;
  bool sabotage = false;
  std::uint64_t seed = 1;
};

int cmd_check(const CheckArgs& a) {
  CheckOptions opt;
  opt.models = a.models;
  opt.fp32 = a.fp32;
  opt.sabotage = a.sabotage;
  opt.seed = a.seed;
  CheckReport rep = run_check_suite(opt);
  std::printf("gradient check: max rel err %.3e (tolerance %.0e) %s\n", rep.grad_max_rel_err,
              rep.grad_tolerance, rep.grad_ok ? "ok" : "FAIL");
  std::printf("masking invariance: %s\n", rep.mask_ok ? "ok" : "FAIL");
  std::printf("reduction identity: %s\n", rep.reduction_ok ? "ok" : "FAIL");
  if (rep.sabotage_requested) {
    std::printf("sabotage: %s\n", rep.sabotage_detected ? "detected" : "NOT DETECTED");
    // A sabotaged build must never report success.
    return 2;
  }
  return rep.ok() ? 0 : 2;
}

// ---- rollout dump ----

struct DumpArgs {
  CommonArgs common;
  std::string checkpoint_path;
  std::string out_path = "rollouts.jsonl";
  int problems = -1;
  int k = -1;
  double temperature = -1.0;
};

template <typename Real>
int run_dump(const RunConfig& cfg, const DumpArgs& a) {
  const VocabSpec vocab = default_vocab();
  PolicySnapshot snap;
  if (!a.checkpoint_path.empty()) {
    snap = load_checkpoint(a.checkpoint_path, config_digest(cfg)).snapshot;
  } else {
    std::vector<double> nll;
    snap = warmstarted_policy<Real>(cfg, &nll);
  }
  std::vector<Real> params(snap.params.begin(), snap.params.end());

  EnvConfig env = cfg.env;
  if (a.problems > 0) env.eval_problem_count = a.problems;
  std::vector<Problem> problems = make_eval_problems(vocab, env);
  PatternSet active = active_patterns(cfg, vocab);
  const int k = a.k > 0 ? a.k : cfg.train.rollouts_per_pattern;
  const double temperature = a.temperature >= 0.0 ? a.temperature : cfg.train.temperature;
  const std::uint64_t master = mix_seed({cfg.seed, 0x64756d70ull});

  JsonlWriter w(a.out_path, config_digest(cfg), "rollouts");
  SequenceRun<Real> run(cfg.arch, params);
  int written = 0;
  for (const Problem& prob : problems) {
    for (int i = 0; i < active.size(); ++i) {
      const Pattern& pat = active.at(i);
      std::uint64_t group_seed = mix_seed({master, prob.id, static_cast<std::uint64_t>(pat.index)});
      PatternGroup group =
          rollout_group(run, vocab, prob, pat, k, temperature, cfg.train.max_new_tokens, group_seed);
      score_group(group, vocab, prob);
      for (const Trajectory& traj : group.members) {
        w.write({{"problem_id", traj.problem_id},
                 {"family", family_name(prob.family)},
                 {"pattern", pat.name},
                 {"seed", traj.seed},
                 {"prompt", prob.prompt},
                 {"suffix_len", traj.suffix_len},
                 {"response", traj.response},
                 {"logprobs", traj.logprobs},
                 {"reward", traj.reward.value()},
                 {"truncated", traj.truncated}});
        ++written;
      }
    }
  }
  std::printf("wrote %d rollouts to %s\n", written, a.out_path.c_str());
  return 0;
}

int cmd_dump(const DumpArgs& a) {
  RunConfig cfg = load_config(a.common);
  validate_run_config(cfg);
  return cfg.fp32 ? run_dump<float>(cfg, a) : run_dump<double>(cfg, a);
}

void add_common(CLI::App* sub, CommonArgs& c, bool with_workers = true) {
  sub->add_option("--config", c.config_path, "JSON run configuration (defaults when omitted)");
  sub->add_flag("--fp32{true},--fp64{false}", c.fp32, "compute precision override")
      ->each([&c](const std::string&) { c.fp32_set = true; });
  sub->add_option("--seed", c.seed, "seed override")
      ->each([&c](const std::string&) { c.seed_set = true; });
  if (with_workers) {
    sub->add_option("--workers", c.workers, "worker threads (result is worker-count invariant)")
        ->check(CLI::PositiveNumber);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"group pattern selection optimization lab"};
  app.require_subcommand(1);

  TrainArgs train_args;
  CLI::App* t = app.add_subcommand("train", "warm start, then run the RL loop; writes logs and a checkpoint");
  add_common(t, train_args.common);
  t->add_option("--out", train_args.out_dir, "output directory")->required();
  t->add_option("--steps", train_args.steps, "step count override");
  t->add_option("--algorithm", train_args.algorithm, "gpso | grpo | gpso_no_ops | gpso_no_mask");
  t->add_option("--patterns", train_args.patterns, "pattern subset override")->delimiter(',');

  EvalArgs eval_args;
  CLI::App* e = app.add_subcommand("eval", "evaluate a checkpoint on the held-out problems");
  add_common(e, eval_args.common);
  e->add_option("--checkpoint", eval_args.checkpoint_path, "checkpoint file")->required();
  e->add_option("--report", eval_args.report_path, "also write a JSON report here");
  e->add_option("--k", eval_args.k, "samples per problem");
  e->add_option("--temperature", eval_args.temperature, "sampling temperature");

  AblateArgs ablate_args;
  CLI::App* b = app.add_subcommand("ablate", "train every algorithm variant and tabulate pass@1");
  add_common(b, ablate_args.common);
  b->add_option("--seeds", ablate_args.seeds, "seeds, one matrix per seed")->delimiter(',');
  b->add_option("--out", ablate_args.out_path, "CSV path");

  CheckArgs check_args;
  CLI::App* c = app.add_subcommand("check", "finite-difference and invariance self-check");
  c->add_option("--models", check_args.models, "random models to test")->check(CLI::PositiveNumber);
  c->add_option("--seed", check_args.seed, "seed");
  c->add_flag("--fp32", check_args.fp32, "check the fp32 gradient path");
  c->add_flag("--sabotage", check_args.sabotage, "corrupt one gradient coordinate; must be detected");

  DumpArgs dump_args;
  CLI::App* d = app.add_subcommand("rollout-dump", "sample rollouts on held-out problems as JSONL");
  add_common(d, dump_args.common, false);
  d->add_option("--checkpoint", dump_args.checkpoint_path, "checkpoint (fresh warm start when omitted)");
  d->add_option("--out", dump_args.out_path, "JSONL path");
  d->add_option("--problems", dump_args.problems, "problem count override");
  d->add_option("--k", dump_args.k, "rollouts per problem and pattern");
  d->add_option("--temperature", dump_args.temperature, "sampling temperature");

  CLI11_PARSE(app, argc, argv);

  try {
    if (t->parsed()) return cmd_train(train_args);
    if (e->parsed()) return cmd_eval(eval_args);
    if (b->parsed()) return cmd_ablate(ablate_args);
    if (c->parsed()) return cmd_check(check_args);
    if (d->parsed()) return cmd_dump(dump_args);
  } catch (const ConfigError& ex) {
    std::fprintf(stderr, "error: %s\n", ex.what());
    return 1;
  } catch (const InputError& ex) {
    std::fprintf(stderr, "error: %s\n", ex.what());
    return 1;
  } catch (const std::exception& ex) {
    std::fprintf(stderr, "error: %s\n", ex.what());
    return 2;
  }
  return 0;
}
