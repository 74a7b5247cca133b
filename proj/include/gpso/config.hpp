#pragma once

#include <algorithm>
#include <cstdint>
#include <initializer_list>
#include <string>
#include <vector>

#include <json.hpp>

#include "gpso/arch.hpp"
#include "gpso/corpus.hpp"
#include "gpso/error.hpp"
#include "gpso/objective.hpp"
#include "gpso/patterns.hpp"
#include "gpso/rng.hpp"

namespace gpso {

enum class Algorithm { gpso, grpo, gpso_no_ops, gpso_no_mask };

inline const char* algorithm_name(Algorithm a) {
  switch (a) {
    case Algorithm::gpso: return "gpso";
    case Algorithm::grpo: return "grpo";
    case Algorithm::gpso_no_ops: return "gpso_no_ops";
    case Algorithm::gpso_no_mask: return "gpso_no_mask";
  }
  return "gpso";
}

inline Algorithm algorithm_from_name(const std::string& s) {
  if (s == "gpso") return Algorithm::gpso;
  if (s == "grpo") return Algorithm::grpo;
  if (s == "gpso_no_ops") return Algorithm::gpso_no_ops;
  if (s == "gpso_no_mask") return Algorithm::gpso_no_mask;
  throw ConfigError("config: unknown algorithm '" + s + "'");
}

// Task environment: problem families, the warm-start generator, and the
// train/eval problem split (disjoint seed ranges).
struct EnvConfig {
  std::vector<FamilySpec> families = {{Family::mod_chain, 2}, {Family::select_idx, 1}};
  std::vector<std::vector<double>> affinity = {{0.1, 0.1, 0.9}, {0.95, 0.55, 0.0}};
  double suffix_adherence = 0.8;
  std::vector<double> default_style_weights = {0.15, 0.85, 0.0};
  int warmstart_examples = 16000;
  std::uint64_t train_problem_seeds = 512;
  std::uint64_t warmstart_problem_seeds = 1 << 19;
  std::uint64_t eval_seed_start = 1000000;
  int eval_problem_count = 100;
};

struct TrainConfig {
  Algorithm algorithm = Algorithm::gpso;
  std::vector<std::string> patterns = {"direct", "reflect", "explore", "adaptive"};
  int steps = 250;
  int batch_size = 8;          // problems per step
  int minibatch_size = 8;      // problems per optimizer step
  int rollouts_per_pattern = 4;
  double temperature = 1.0;    // rollout sampling
  int max_new_tokens = 8;
  int warmstart_epochs = 45;
  double warmstart_lr = 0.01;
  int warmstart_attempts = 3;   // init redraws when the imitation gate fails
  double warmstart_gate = 0.5;  // per family: best instructed accuracy on training problems
  int eval_every = 0;          // 0 disables periodic eval
  int eval_k = 4;
  double eval_temperature = 0.6;
  ClipConfig clip;
};

struct RunConfig {
  std::uint64_t seed = 7;
  bool fp32 = false;
  ArchConfig arch;
  EnvConfig env;
  TrainConfig train;
};

// ---- JSON parsing with unknown-key rejection ----

namespace cfgdetail {

inline std::string qual(const std::string& section, const char* key) {
  return section.empty() ? std::string(key) : section + "." + key;
}

inline void reject_unknown(const nlohmann::json& j, const std::string& section,
                           std::initializer_list<const char*> known) {
  if (!j.is_object()) throw ConfigError("config: section '" + section + "' must be an object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool ok = false;
    for (const char* k : known) {
      if (it.key() == k) { ok = true; break; }
    }
    if (!ok) throw ConfigError("config: unknown key '" + qual(section, it.key().c_str()) + "'");
  }
}

inline double get_num(const nlohmann::json& j, const std::string& section, const char* key, double fb) {
  if (!j.contains(key)) return fb;
  const nlohmann::json& v = j.at(key);
  if (!v.is_number()) throw ConfigError("config: key '" + qual(section, key) + "' must be a number");
  return v.get<double>();
}

inline int get_int(const nlohmann::json& j, const std::string& section, const char* key, int fb) {
  if (!j.contains(key)) return fb;
  const nlohmann::json& v = j.at(key);
  if (!v.is_number_integer()) throw ConfigError("config: key '" + qual(section, key) + "' must be an integer");
  return v.get<int>();
}

inline std::uint64_t get_u64(const nlohmann::json& j, const std::string& section, const char* key,
                             std::uint64_t fb) {
  if (!j.contains(key)) return fb;
  const nlohmann::json& v = j.at(key);
  if (!v.is_number_integer()) {
    throw ConfigError("config: key '" + qual(section, key) + "' must be a nonnegative integer");
  }
  if (!v.is_number_unsigned() && v.get<std::int64_t>() < 0) {
    throw ConfigError("config: key '" + qual(section, key) + "' must be a nonnegative integer");
  }
  return v.get<std::uint64_t>();
}

inline bool get_bool(const nlohmann::json& j, const std::string& section, const char* key, bool fb) {
  if (!j.contains(key)) return fb;
  const nlohmann::json& v = j.at(key);
  if (!v.is_boolean()) throw ConfigError("config: key '" + qual(section, key) + "' must be a boolean");
  return v.get<bool>();
}

inline std::string get_str(const nlohmann::json& j, const std::string& section, const char* key,
                           const std::string& fb) {
  if (!j.contains(key)) return fb;
  const nlohmann::json& v = j.at(key);
  if (!v.is_string()) throw ConfigError("config: key '" + qual(section, key) + "' must be a string");
  return v.get<std::string>();
}

// Concrete style names in canonical order; affinity tables and default style
// weights are keyed by these in the config document.
inline const std::vector<std::string>& style_names() {
  static const std::vector<std::string> names = {"direct", "reflect", "explore"};
  return names;
}

inline std::vector<double> parse_style_map(const nlohmann::json& j, const std::string& section) {
  if (!j.is_object()) throw ConfigError("config: '" + section + "' must map style names to numbers");
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool ok = false;
    for (const std::string& s : style_names()) {
      if (it.key() == s) { ok = true; break; }
    }
    if (!ok) throw ConfigError("config: unknown key '" + qual(section, it.key().c_str()) + "'");
  }
  std::vector<double> out;
  for (const std::string& s : style_names()) {
    if (!j.contains(s)) throw ConfigError("config: '" + section + "' missing style '" + s + "'");
    const nlohmann::json& v = j.at(s);
    if (!v.is_number()) throw ConfigError("config: key '" + section + "." + s + "' must be a number");
    out.push_back(v.get<double>());
  }
  return out;
}

}  // namespace cfgdetail

inline RunConfig run_config_from_json(const nlohmann::json& root) {
  using namespace cfgdetail;
  RunConfig cfg;
  reject_unknown(root, "", {"seed", "fp32", "arch", "env", "train", "clip"});
  // Top level reports keys without the leading dot.
  if (root.contains("seed")) cfg.seed = get_u64(root, "", "seed", cfg.seed);
  cfg.fp32 = get_bool(root, "", "fp32", cfg.fp32);

  if (root.contains("arch")) {
    const nlohmann::json& a = root.at("arch");
    reject_unknown(a, "arch", {"vocab_size", "context_length", "depth", "width", "head_count"});
    cfg.arch.vocab_size = get_int(a, "arch", "vocab_size", cfg.arch.vocab_size);
    cfg.arch.context_length = get_int(a, "arch", "context_length", cfg.arch.context_length);
    cfg.arch.depth = get_int(a, "arch", "depth", cfg.arch.depth);
    cfg.arch.width = get_int(a, "arch", "width", cfg.arch.width);
    cfg.arch.head_count = get_int(a, "arch", "head_count", cfg.arch.head_count);
  }

  if (root.contains("env")) {
    const nlohmann::json& e = root.at("env");
    reject_unknown(e, "env",
                   {"families", "affinity", "suffix_adherence", "default_style_weights",
                    "warmstart_examples", "warmstart_problem_seeds", "train_problem_seeds",
                    "eval_seed_start", "eval_problem_count"});
    if (e.contains("families")) {
      const nlohmann::json& fams = e.at("families");
      if (!fams.is_array() || fams.empty()) {
        throw ConfigError("config: 'env.families' must be a nonempty array");
      }
      cfg.env.families.clear();
      for (const nlohmann::json& f : fams) {
        reject_unknown(f, "env.families[]", {"name", "difficulty"});
        FamilySpec fs;
        fs.family = family_from_name(get_str(f, "env.families[]", "name", ""));
        fs.difficulty = get_int(f, "env.families[]", "difficulty", 1);
        cfg.env.families.push_back(fs);
      }
    }
    if (e.contains("affinity")) {
      const nlohmann::json& aff = e.at("affinity");
      if (!aff.is_object()) throw ConfigError("config: 'env.affinity' must be an object keyed by family");
      cfg.env.affinity.assign(cfg.env.families.size(), {});
      for (auto it = aff.begin(); it != aff.end(); ++it) {
        bool found = false;
        for (std::size_t i = 0; i < cfg.env.families.size(); ++i) {
          if (it.key() == family_name(cfg.env.families[i].family)) {
            cfg.env.affinity[i] = parse_style_map(it.value(), "env.affinity." + it.key());
            found = true;
          }
        }
        if (!found) throw ConfigError("config: unknown key 'env.affinity." + it.key() + "'");
      }
      for (std::size_t i = 0; i < cfg.env.families.size(); ++i) {
        if (cfg.env.affinity[i].empty()) {
          throw ConfigError(std::string("config: 'env.affinity' missing family '") +
                            family_name(cfg.env.families[i].family) + "'");
        }
      }
    }
    cfg.env.suffix_adherence = get_num(e, "env", "suffix_adherence", cfg.env.suffix_adherence);
    if (e.contains("default_style_weights")) {
      cfg.env.default_style_weights =
          parse_style_map(e.at("default_style_weights"), "env.default_style_weights");
    }
    cfg.env.warmstart_examples = get_int(e, "env", "warmstart_examples", cfg.env.warmstart_examples);
    cfg.env.warmstart_problem_seeds =
        get_u64(e, "env", "warmstart_problem_seeds", cfg.env.warmstart_problem_seeds);
    cfg.env.train_problem_seeds = get_u64(e, "env", "train_problem_seeds", cfg.env.train_problem_seeds);
    cfg.env.eval_seed_start = get_u64(e, "env", "eval_seed_start", cfg.env.eval_seed_start);
    cfg.env.eval_problem_count = get_int(e, "env", "eval_problem_count", cfg.env.eval_problem_count);
  }

  if (root.contains("train")) {
    const nlohmann::json& t = root.at("train");
    reject_unknown(t, "train",
                   {"algorithm", "patterns", "steps", "batch_size", "minibatch_size",
                    "rollouts_per_pattern", "temperature", "max_new_tokens", "warmstart_epochs",
                    "warmstart_lr", "warmstart_attempts", "warmstart_gate", "eval_every", "eval_k",
                    "eval_temperature"});
    cfg.train.algorithm = algorithm_from_name(get_str(t, "train", "algorithm", "gpso"));
    if (t.contains("patterns")) {
      const nlohmann::json& ps = t.at("patterns");
      if (!ps.is_array() || ps.empty()) throw ConfigError("config: 'train.patterns' must be a nonempty array");
      cfg.train.patterns.clear();
      for (const nlohmann::json& p : ps) {
        if (!p.is_string()) throw ConfigError("config: 'train.patterns' entries must be strings");
        cfg.train.patterns.push_back(p.get<std::string>());
      }
    }
    cfg.train.steps = get_int(t, "train", "steps", cfg.train.steps);
    cfg.train.batch_size = get_int(t, "train", "batch_size", cfg.train.batch_size);
    cfg.train.minibatch_size = get_int(t, "train", "minibatch_size", cfg.train.minibatch_size);
    cfg.train.rollouts_per_pattern = get_int(t, "train", "rollouts_per_pattern", cfg.train.rollouts_per_pattern);
    cfg.train.temperature = get_num(t, "train", "temperature", cfg.train.temperature);
    cfg.train.max_new_tokens = get_int(t, "train", "max_new_tokens", cfg.train.max_new_tokens);
    cfg.train.warmstart_epochs = get_int(t, "train", "warmstart_epochs", cfg.train.warmstart_epochs);
    cfg.train.warmstart_lr = get_num(t, "train", "warmstart_lr", cfg.train.warmstart_lr);
    cfg.train.warmstart_attempts = get_int(t, "train", "warmstart_attempts", cfg.train.warmstart_attempts);
    cfg.train.warmstart_gate = get_num(t, "train", "warmstart_gate", cfg.train.warmstart_gate);
    cfg.train.eval_every = get_int(t, "train", "eval_every", cfg.train.eval_every);
    cfg.train.eval_k = get_int(t, "train", "eval_k", cfg.train.eval_k);
    cfg.train.eval_temperature = get_num(t, "train", "eval_temperature", cfg.train.eval_temperature);
  }

  if (root.contains("clip")) {
    const nlohmann::json& c = root.at("clip");
    reject_unknown(c, "clip",
                   {"epsilon", "kl_beta", "norm_eps", "ratio_scope", "ratio_baseline", "adamw"});
    cfg.train.clip.epsilon = get_num(c, "clip", "epsilon", cfg.train.clip.epsilon);
    cfg.train.clip.kl_beta = get_num(c, "clip", "kl_beta", cfg.train.clip.kl_beta);
    cfg.train.clip.norm_eps = get_num(c, "clip", "norm_eps", cfg.train.clip.norm_eps);
    const std::string scope = get_str(c, "clip", "ratio_scope", "token");
    if (scope == "token") cfg.train.clip.ratio_scope = RatioScope::token;
    else if (scope == "sequence") cfg.train.clip.ratio_scope = RatioScope::sequence;
    else throw ConfigError("config: key 'clip.ratio_scope' must be 'token' or 'sequence'");
    const std::string base = get_str(c, "clip", "ratio_baseline", "masked_recompute");
    if (base == "masked_recompute") cfg.train.clip.ratio_baseline = RatioBaseline::masked_recompute;
    else if (base == "rollout") cfg.train.clip.ratio_baseline = RatioBaseline::rollout;
    else throw ConfigError("config: key 'clip.ratio_baseline' must be 'masked_recompute' or 'rollout'");
    if (c.contains("adamw")) {
      const nlohmann::json& o = c.at("adamw");
      reject_unknown(o, "clip.adamw", {"lr", "beta1", "beta2", "eps", "weight_decay"});
      cfg.train.clip.adamw.lr = get_num(o, "clip.adamw", "lr", cfg.train.clip.adamw.lr);
      cfg.train.clip.adamw.beta1 = get_num(o, "clip.adamw", "beta1", cfg.train.clip.adamw.beta1);
      cfg.train.clip.adamw.beta2 = get_num(o, "clip.adamw", "beta2", cfg.train.clip.adamw.beta2);
      cfg.train.clip.adamw.eps = get_num(o, "clip.adamw", "eps", cfg.train.clip.adamw.eps);
      cfg.train.clip.adamw.weight_decay = get_num(o, "clip.adamw", "weight_decay", cfg.train.clip.adamw.weight_decay);
    }
  }
  return cfg;
}

inline nlohmann::json run_config_to_json(const RunConfig& cfg) {
  using cfgdetail::style_names;
  nlohmann::json root;
  root["seed"] = cfg.seed;
  root["fp32"] = cfg.fp32;
  root["arch"] = {{"vocab_size", cfg.arch.vocab_size},
                  {"context_length", cfg.arch.context_length},
                  {"depth", cfg.arch.depth},
                  {"width", cfg.arch.width},
                  {"head_count", cfg.arch.head_count}};
  nlohmann::json fams = nlohmann::json::array();
  for (const FamilySpec& f : cfg.env.families) {
    fams.push_back({{"name", family_name(f.family)}, {"difficulty", f.difficulty}});
  }
  nlohmann::json aff;
  for (std::size_t i = 0; i < cfg.env.families.size(); ++i) {
    nlohmann::json row;
    for (std::size_t s = 0; s < style_names().size() && s < cfg.env.affinity[i].size(); ++s) {
      row[style_names()[s]] = cfg.env.affinity[i][s];
    }
    aff[family_name(cfg.env.families[i].family)] = row;
  }
  nlohmann::json dsw;
  for (std::size_t s = 0; s < style_names().size() && s < cfg.env.default_style_weights.size(); ++s) {
    dsw[style_names()[s]] = cfg.env.default_style_weights[s];
  }
  root["env"] = {{"families", fams},
                 {"affinity", aff},
                 {"suffix_adherence", cfg.env.suffix_adherence},
                 {"default_style_weights", dsw},
                 {"warmstart_examples", cfg.env.warmstart_examples},
                 {"warmstart_problem_seeds", cfg.env.warmstart_problem_seeds},
                 {"train_problem_seeds", cfg.env.train_problem_seeds},
                 {"eval_seed_start", cfg.env.eval_seed_start},
                 {"eval_problem_count", cfg.env.eval_problem_count}};
  root["train"] = {{"algorithm", algorithm_name(cfg.train.algorithm)},
                   {"patterns", cfg.train.patterns},
                   {"steps", cfg.train.steps},
                   {"batch_size", cfg.train.batch_size},
                   {"minibatch_size", cfg.train.minibatch_size},
                   {"rollouts_per_pattern", cfg.train.rollouts_per_pattern},
                   {"temperature", cfg.train.temperature},
                   {"max_new_tokens", cfg.train.max_new_tokens},
                   {"warmstart_epochs", cfg.train.warmstart_epochs},
                   {"warmstart_lr", cfg.train.warmstart_lr},
                   {"warmstart_attempts", cfg.train.warmstart_attempts},
                   {"warmstart_gate", cfg.train.warmstart_gate},
                   {"eval_every", cfg.train.eval_every},
                   {"eval_k", cfg.train.eval_k},
                   {"eval_temperature", cfg.train.eval_temperature}};
  root["clip"] = {{"epsilon", cfg.train.clip.epsilon},
                  {"kl_beta", cfg.train.clip.kl_beta},
                  {"norm_eps", cfg.train.clip.norm_eps},
                  {"ratio_scope", cfg.train.clip.ratio_scope == RatioScope::token ? "token" : "sequence"},
                  {"ratio_baseline", cfg.train.clip.ratio_baseline == RatioBaseline::masked_recompute
                                         ? "masked_recompute"
                                         : "rollout"},
                  {"adamw", {{"lr", cfg.train.clip.adamw.lr},
                             {"beta1", cfg.train.clip.adamw.beta1},
                             {"beta2", cfg.train.clip.adamw.beta2},
                             {"eps", cfg.train.clip.adamw.eps},
                             {"weight_decay", cfg.train.clip.adamw.weight_decay}}}};
  return root;
}

// Keys sort alphabetically in serialization, so the dump is canonical: parse
// then re-dump is a fixed point.
inline std::string canonical_dump(const RunConfig& cfg) { return run_config_to_json(cfg).dump(2) + "\n"; }

inline std::uint64_t fnv1a64(const std::string& s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= static_cast<std::uint64_t>(c);
    h *= 1099511628211ull;
  }
  return h;
}

inline std::string digest_hex(std::uint64_t h) {
  static const char* hexd = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[static_cast<std::size_t>(i)] = hexd[h & 0xf];
    h >>= 4;
  }
  return out;
}

inline std::string config_digest(const RunConfig& cfg) {
  return digest_hex(fnv1a64(run_config_to_json(cfg).dump()));
}

inline RunConfig parse_run_config(const std::string& text) {
  nlohmann::json root;
  try {
    root = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    // Report the line of the failure, computed from the byte offset.
    std::size_t line = 1;
    for (std::size_t i = 0; i < text.size() && i + 1 < e.byte; ++i) {
      if (text[i] == '\n') ++line;
    }
    throw ConfigError("config: parse error at line " + std::to_string(line) + ": " + e.what());
  }
  return run_config_from_json(root);
}

// The full pattern set the vocabulary supports, independent of the subset a
// run rolls out. The warm-start corpus always covers all of it.
inline PatternSet full_patterns(const VocabSpec& vocab) { return default_patterns(vocab); }

inline PatternSet active_patterns(const RunConfig& cfg, const VocabSpec& vocab) {
  return select_patterns(default_patterns(vocab), cfg.train.patterns);
}

inline CorpusConfig corpus_config_from(const RunConfig& cfg) {
  CorpusConfig c;
  c.families = cfg.env.families;
  c.affinity = cfg.env.affinity;
  c.suffix_adherence = cfg.env.suffix_adherence;
  c.default_style_weights = cfg.env.default_style_weights;
  c.example_count = cfg.env.warmstart_examples;
  c.seed = mix_seed({cfg.seed, 0x77617273ull});
  c.problem_seed_count = cfg.env.warmstart_problem_seeds;
  return c;
}

inline int max_prompt_length(const EnvConfig& env) {
  int m = 0;
  for (const FamilySpec& f : env.families) {
    int len = f.family == Family::mod_chain ? 2 * f.difficulty + 3 : f.difficulty + 3;
    m = std::max(m, len);
  }
  return m;
}

inline void validate_run_config(const RunConfig& cfg) {
  validate_arch(cfg.arch);
  validate_clip(cfg.train.clip);
  const VocabSpec vocab = default_vocab();
  if (cfg.arch.vocab_size != vocab.vocab_size) {
    throw ConfigError("config: arch.vocab_size must match the task vocabulary (" +
                      std::to_string(vocab.vocab_size) + ")");
  }
  PatternSet active = active_patterns(cfg, vocab);
  validate_patterns(vocab, active);
  CorpusConfig corpus = corpus_config_from(cfg);
  validate_corpus_config(corpus, full_patterns(vocab));

  const TrainConfig& t = cfg.train;
  if (t.steps < 0) throw ConfigError("config: train.steps must be >= 0");
  if (t.batch_size < 1) throw ConfigError("config: train.batch_size must be >= 1");
  if (t.minibatch_size < 1) throw ConfigError("config: train.minibatch_size must be >= 1");
  if (t.batch_size % t.minibatch_size != 0) {
    throw ConfigError("config: train.batch_size must be divisible by train.minibatch_size");
  }
  if (t.rollouts_per_pattern < 1) throw ConfigError("config: train.rollouts_per_pattern must be >= 1");
  if (t.temperature < 0.0) throw ConfigError("config: train.temperature must be >= 0");
  if (t.eval_temperature < 0.0) throw ConfigError("config: train.eval_temperature must be >= 0");
  if (t.max_new_tokens < 1) throw ConfigError("config: train.max_new_tokens must be >= 1");
  if (t.warmstart_epochs < 0) throw ConfigError("config: train.warmstart_epochs must be >= 0");
  if (t.warmstart_lr <= 0.0) throw ConfigError("config: train.warmstart_lr must be > 0");
  if (t.warmstart_attempts < 1) throw ConfigError("config: train.warmstart_attempts must be >= 1");
  if (t.warmstart_gate < 0.0 || t.warmstart_gate > 1.0) {
    throw ConfigError("config: train.warmstart_gate must be in [0, 1]");
  }
  if (t.eval_every < 0) throw ConfigError("config: train.eval_every must be >= 0");
  if (t.eval_k < 1) throw ConfigError("config: train.eval_k must be >= 1");
  if (cfg.env.eval_problem_count < 1) throw ConfigError("config: env.eval_problem_count must be >= 1");
  if (cfg.env.warmstart_examples < 0) throw ConfigError("config: env.warmstart_examples must be >= 0");
  if (cfg.env.eval_seed_start < cfg.env.train_problem_seeds) {
    throw ConfigError("config: env.eval_seed_start must not overlap the train seed range");
  }
  if (cfg.env.eval_seed_start < cfg.env.warmstart_problem_seeds) {
    throw ConfigError("config: env.eval_seed_start must not overlap the warmstart seed range");
  }
  if (cfg.env.warmstart_problem_seeds == 0) {
    throw ConfigError("config: env.warmstart_problem_seeds must be positive");
  }
  if (t.algorithm == Algorithm::grpo && t.patterns.size() != 1) {
    throw ConfigError("config: algorithm 'grpo' takes exactly one pattern");
  }

  int suffix_max = 0;
  for (int i = 0; i < active.size(); ++i) {
    suffix_max = std::max(suffix_max, static_cast<int>(active.at(i).suffix.size()));
  }
  const int need = max_prompt_length(cfg.env) + suffix_max + t.max_new_tokens;
  if (need > cfg.arch.context_length) {
    throw ConfigError("config: context_length " + std::to_string(cfg.arch.context_length) +
                      " too small for prompt+suffix+response budget " + std::to_string(need));
  }
}

}  // namespace gpso
