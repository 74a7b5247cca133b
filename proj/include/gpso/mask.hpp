#pragma once

#include <cstdint>
#include <vector>

#include "gpso/error.hpp"
#include "gpso/tokens.hpp"

namespace gpso {

// Update-time view of one trajectory: prompt, instruction suffix, response,
// concatenated. Rows are processed unpadded; the budgets bound the layout
// (suffix must fit inside the prompt region, response inside the response
// region), mirroring a fixed B x (L_prompt + L_resp) arrangement.
struct BatchRow {
  std::vector<int> tokens;
  int prompt_len = 0;
  int suffix_len = 0;

  int response_len() const {
    return static_cast<int>(tokens.size()) - prompt_len - suffix_len;
  }
  int response_start() const { return prompt_len + suffix_len; }
};

struct TokenBatch {
  int prompt_budget = 0;
  int response_budget = 0;
  std::vector<BatchRow> rows;
};

inline void validate_batch(const TokenBatch& batch) {
  if (batch.prompt_budget < 1 || batch.response_budget < 1) {
    throw ConfigError("batch: budgets must be positive");
  }
  for (const BatchRow& r : batch.rows) {
    if (r.prompt_len < 1) throw InputError("batch: empty prompt");
    if (r.suffix_len < 0) throw InputError("batch: negative suffix length");
    if (r.prompt_len + r.suffix_len > batch.prompt_budget) {
      throw InputError("batch: suffix span outside prompt region");
    }
    if (r.response_len() < 1) throw InputError("batch: empty response");
    if (r.response_len() > batch.response_budget) {
      throw InputError("batch: response exceeds response budget");
    }
  }
}

// Per-position visibility, aligned with BatchRow tokens. 0 marks positions
// whose content must not influence any other position.
struct SuffixMask {
  std::vector<std::vector<std::uint8_t>> rows;
};

// Masks every suffix position (and any literal PAD token) to 0, everything
// else 1. This is the update-time mask: instruction tokens steer rollouts but
// are erased from the conditioning being optimized.
inline SuffixMask build_suffix_mask(const VocabSpec& vocab, const TokenBatch& batch) {
  validate_batch(batch);
  SuffixMask mask;
  mask.rows.reserve(batch.rows.size());
  for (const BatchRow& r : batch.rows) {
    std::vector<std::uint8_t> row(r.tokens.size(), 1);
    for (int p = r.prompt_len; p < r.prompt_len + r.suffix_len; ++p) {
      row[static_cast<std::size_t>(p)] = 0;
    }
    for (std::size_t p = 0; p < r.tokens.size(); ++p) {
      if (r.tokens[p] == vocab.pad_id) row[p] = 0;
    }
    mask.rows.push_back(std::move(row));
  }
  return mask;
}

// Mask-off ablation: the suffix stays visible; only literal PAD is hidden.
inline SuffixMask all_visible_mask(const VocabSpec& vocab, const TokenBatch& batch) {
  validate_batch(batch);
  SuffixMask mask;
  mask.rows.reserve(batch.rows.size());
  for (const BatchRow& r : batch.rows) {
    std::vector<std::uint8_t> row(r.tokens.size(), 1);
    for (std::size_t p = 0; p < r.tokens.size(); ++p) {
      if (r.tokens[p] == vocab.pad_id) row[p] = 0;
    }
    mask.rows.push_back(std::move(row));
  }
  return mask;
}

}  // namespace gpso
