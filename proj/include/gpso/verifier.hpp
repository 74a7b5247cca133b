#pragma once

#include <optional>
#include <vector>

#include "gpso/tokens.hpp"

namespace gpso {

// Strips leading zeros from all-digit spans ("042" -> "42", "000" -> "0").
// Non-numeric spans pass through untouched.
inline std::vector<int> canonicalize_answer(const VocabSpec& vocab, std::vector<int> span) {
  bool numeric = !span.empty();
  for (int id : span) {
    if (!vocab.is_digit(id)) { numeric = false; break; }
  }
  if (!numeric) return span;
  std::size_t first = 0;
  while (first + 1 < span.size() && span[first] == vocab.digit_token(0)) ++first;
  return std::vector<int>(span.begin() + static_cast<std::ptrdiff_t>(first), span.end());
}

// The answer is the span strictly between the last ANSWER_DELIM and the first
// EOS after it. Missing delimiter, missing EOS, or an empty span parse to
// nothing (scored wrong). A truncated response has no EOS, so it never parses.
inline std::optional<std::vector<int>> extract_answer(const VocabSpec& vocab,
                                                      const std::vector<int>& tokens) {
  std::ptrdiff_t delim = -1;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (tokens[i] == vocab.answer_delim_id) delim = static_cast<std::ptrdiff_t>(i);
  }
  if (delim < 0) return std::nullopt;
  std::ptrdiff_t eos = -1;
  for (std::size_t i = static_cast<std::size_t>(delim) + 1; i < tokens.size(); ++i) {
    if (tokens[i] == vocab.eos_id) { eos = static_cast<std::ptrdiff_t>(i); break; }
  }
  if (eos < 0 || eos == delim + 1) return std::nullopt;
  return std::vector<int>(tokens.begin() + delim + 1, tokens.begin() + eos);
}

// Binary verifiable reward: token-exact match after canonicalization.
inline int verify(const VocabSpec& vocab, const std::vector<int>& response,
                  const std::vector<int>& golden) {
  auto span = extract_answer(vocab, response);
  if (!span) return 0;
  return canonicalize_answer(vocab, *span) == canonicalize_answer(vocab, golden) ? 1 : 0;
}

}  // namespace gpso
