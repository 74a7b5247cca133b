#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "gpso/error.hpp"
#include "gpso/rng.hpp"

namespace gpso {

// Decoder-only attention network: token+position embeddings, `depth` pre-norm
// blocks (multi-head attention, 4x GELU MLP), parameter-free RMSNorm, untied
// output head. Small enough that exact 64-bit gradients are cheap.
struct ArchConfig {
  int vocab_size = 23;
  int context_length = 24;
  int depth = 1;
  int width = 32;
  int head_count = 4;
  std::uint64_t init_seed = 1;
};

inline void validate_arch(const ArchConfig& a) {
  if (a.vocab_size < 2) throw ConfigError("arch: vocab_size must be >= 2");
  if (a.context_length < 2) throw ConfigError("arch: context_length must be >= 2");
  if (a.depth < 1) throw ConfigError("arch: depth must be >= 1");
  if (a.width < 1) throw ConfigError("arch: width must be >= 1");
  if (a.head_count < 1) throw ConfigError("arch: head_count must be >= 1");
  if (a.width % a.head_count != 0) throw ConfigError("arch: head_count must divide width");
}

struct ParamSegment {
  std::string name;
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::size_t offset = 0;

  std::size_t count() const { return rows * cols; }
};

// Flat parameter layout, fixed order. Matrices are row-major [rows x cols]
// applied as y = W x (rows = output dim, cols = input dim).
inline std::vector<ParamSegment> param_manifest(const ArchConfig& a) {
  validate_arch(a);
  std::vector<ParamSegment> m;
  std::size_t off = 0;
  auto add = [&](const std::string& name, std::size_t rows, std::size_t cols) {
    m.push_back({name, rows, cols, off});
    off += rows * cols;
  };
  std::size_t w = static_cast<std::size_t>(a.width);
  add("tok_emb", static_cast<std::size_t>(a.vocab_size), w);
  add("pos_emb", static_cast<std::size_t>(a.context_length), w);
  for (int l = 0; l < a.depth; ++l) {
    std::string b = "blk" + std::to_string(l) + ".";
    add(b + "wq", w, w);
    add(b + "wk", w, w);
    add(b + "wv", w, w);
    add(b + "wo", w, w);
    add(b + "w1", 4 * w, w);
    add(b + "w2", w, 4 * w);
  }
  add("head", static_cast<std::size_t>(a.vocab_size), w);
  return m;
}

inline std::size_t param_count(const ArchConfig& a) {
  const auto m = param_manifest(a);
  return m.back().offset + m.back().count();
}

// Model parameters plus training progress. Values are always stored in 64-bit;
// reduced-precision computation happens in the kernels, not in the state.
struct PolicySnapshot {
  ArchConfig arch;
  std::vector<double> params;
  std::uint64_t step = 0;
};

// Uniform symmetric initialization: weight matrices at scale 1/sqrt(fan_in),
// embeddings and head at 0.05. Distinct seeds give almost-everywhere distinct
// parameters.
inline PolicySnapshot init_policy(const ArchConfig& arch, std::uint64_t seed) {
  validate_arch(arch);
  PolicySnapshot s;
  s.arch = arch;
  s.arch.init_seed = seed;
  s.params.assign(param_count(arch), 0.0);
  Rng rng(mix_seed({0x696e6974ull, seed}));
  for (const ParamSegment& seg : param_manifest(arch)) {
    double scale;
    if (seg.name == "tok_emb" || seg.name == "pos_emb" || seg.name == "head") {
      scale = 0.05;
    } else {
      scale = 1.0 / std::sqrt(static_cast<double>(seg.cols));
    }
    for (std::size_t i = 0; i < seg.count(); ++i) {
      s.params[seg.offset + i] = rng.next_range(-scale, scale);
    }
  }
  return s;
}

}  // namespace gpso
