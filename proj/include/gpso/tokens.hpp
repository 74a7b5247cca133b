#pragma once

#include <string>
#include <vector>

#include "gpso/error.hpp"

namespace gpso {

// Token id scheme shared by problems, traces, and the policy. Ids are dense
// in [0, vocab_size). Digits always occupy [0, digit_count) so digit tokens
// and digit values coincide.
struct VocabSpec {
  int digit_count = 0;
  int add_id = -1;   // '+'
  int mul_id = -1;   // '*'
  int mod_id = -1;   // modulus marker in mod_chain prompts
  int pick_id = -1;  // candidate-list marker in select_idx prompts
  int answer_delim_id = -1;
  int eos_id = -1;
  int pad_id = -1;
  std::vector<int> pattern_tag_ids;  // one per pattern, enumeration order
  std::vector<int> instruction_ids;  // filler tokens used by instruction suffixes
  int vocab_size = 0;

  bool is_digit(int id) const { return id >= 0 && id < digit_count; }
  int digit_token(int value) const {
    if (value < 0 || value >= digit_count) throw InputError("digit_token: value out of range");
    return value;
  }
  int digit_value(int id) const {
    if (!is_digit(id)) throw InputError("digit_value: not a digit token");
    return id;
  }

  // Decimal digit tokens for a nonnegative integer, no leading zeros.
  std::vector<int> number_tokens(long long value) const {
    if (value < 0) throw InputError("number_tokens: negative value");
    std::vector<int> out;
    if (value == 0) return {digit_token(0)};
    while (value > 0) {
      out.insert(out.begin(), digit_token(static_cast<int>(value % 10)));
      value /= 10;
    }
    return out;
  }
};

// Full task vocabulary: digits, operators, family markers, control tokens,
// four pattern tags, two instruction fillers.
inline VocabSpec default_vocab() {
  VocabSpec v;
  v.digit_count = 10;
  v.add_id = 10;
  v.mul_id = 11;
  v.mod_id = 12;
  v.pick_id = 13;
  v.answer_delim_id = 14;
  v.eos_id = 15;
  v.pad_id = 16;
  v.pattern_tag_ids = {17, 18, 19, 20};
  v.instruction_ids = {21, 22};
  v.vocab_size = 23;
  return v;
}

// Slim vocabulary for closed-form evaluation tests: digits plus the minimum
// control tokens. 10 + 3 + tags.
inline VocabSpec minimal_vocab(int pattern_tags) {
  VocabSpec v;
  v.digit_count = 10;
  v.answer_delim_id = 10;
  v.eos_id = 11;
  v.pad_id = 12;
  for (int i = 0; i < pattern_tags; ++i) v.pattern_tag_ids.push_back(13 + i);
  v.vocab_size = 13 + pattern_tags;
  return v;
}

inline void validate_vocab(const VocabSpec& v) {
  std::vector<int> reserved;
  for (int d = 0; d < v.digit_count; ++d) reserved.push_back(d);
  for (int id : {v.add_id, v.mul_id, v.mod_id, v.pick_id}) {
    if (id >= 0) reserved.push_back(id);
  }
  for (int id : {v.answer_delim_id, v.eos_id, v.pad_id}) {
    if (id < 0) throw ConfigError("vocab: answer_delim, eos, and pad are required");
    reserved.push_back(id);
  }
  for (int id : v.pattern_tag_ids) reserved.push_back(id);
  for (int id : v.instruction_ids) reserved.push_back(id);
  std::vector<bool> seen(static_cast<std::size_t>(v.vocab_size), false);
  for (int id : reserved) {
    if (id < 0 || id >= v.vocab_size) throw ConfigError("vocab: reserved id outside [0, vocab_size)");
    if (seen[static_cast<std::size_t>(id)]) throw ConfigError("vocab: duplicate reserved id " + std::to_string(id));
    seen[static_cast<std::size_t>(id)] = true;
  }
}

// Readable names for dumps and error messages.
inline std::string token_name(const VocabSpec& v, int id) {
  if (v.is_digit(id)) return std::string(1, static_cast<char>('0' + id));
  if (id == v.add_id) return "+";
  if (id == v.mul_id) return "*";
  if (id == v.mod_id) return "mod";
  if (id == v.pick_id) return "pick";
  if (id == v.answer_delim_id) return "=>";
  if (id == v.eos_id) return "<eos>";
  if (id == v.pad_id) return "<pad>";
  for (std::size_t j = 0; j < v.pattern_tag_ids.size(); ++j) {
    if (id == v.pattern_tag_ids[j]) return "<tag" + std::to_string(j) + ">";
  }
  for (std::size_t j = 0; j < v.instruction_ids.size(); ++j) {
    if (id == v.instruction_ids[j]) return "<instr" + std::to_string(j) + ">";
  }
  return "<unk" + std::to_string(id) + ">";
}

}  // namespace gpso
