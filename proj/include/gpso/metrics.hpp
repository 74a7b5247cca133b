#pragma once

#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "gpso/ablation.hpp"
#include "gpso/error.hpp"
#include "gpso/train.hpp"

namespace gpso {

// Shortest text that round-trips the value, so logs are canonical.
inline std::string number_text(double v) { return nlohmann::json(v).dump(); }

inline nlohmann::json to_json(const StepMetrics& m, const PatternSet& active) {
  nlohmann::json hist;
  for (int j = 0; j < active.size() && j < static_cast<int>(m.chosen_histogram.size()); ++j) {
    hist[active.at(j).name] = m.chosen_histogram[static_cast<std::size_t>(j)];
  }
  return nlohmann::json{{"step", m.step},
                        {"objective", m.objective},
                        {"surrogate", m.surrogate},
                        {"kl", m.kl},
                        {"grad_norm", m.grad_norm},
                        {"mean_ratio", m.mean_ratio},
                        {"clip_fraction", m.clip_fraction},
                        {"mean_reward", m.mean_reward},
                        {"skipped_count", m.skipped},
                        {"nonfinite_count", m.nonfinite},
                        {"chosen_pattern_histogram", hist}};
}

inline nlohmann::json to_json(const SelectionRecord& r, const PatternSet& active) {
  nlohmann::json j{{"step", r.step},
                   {"problem", r.problem_id},
                   {"family", r.family},
                   {"correct", r.correct},
                   {"total", r.total},
                   {"tie_break", r.tie_break},
                   {"skip", r.skip}};
  if (r.selected >= 0 && r.selected < active.size()) {
    j["selected"] = active.at(r.selected).name;
  } else {
    j["selected"] = nullptr;
  }
  return j;
}

inline nlohmann::json to_json(const EvalReport& rep) {
  nlohmann::json fixed, family, usage;
  for (const auto& [name, v] : rep.fixed) fixed[name] = v;
  for (const auto& [name, v] : rep.per_family) family[name] = v;
  for (const auto& [name, v] : rep.usage) usage[name] = v;
  return nlohmann::json{{"problems", rep.problem_count},
                        {"k", rep.k},
                        {"temperature", rep.temperature},
                        {"adaptive_pass1", rep.adaptive_pass1},
                        {"oracle_pass1", rep.oracle_pass1},
                        {"fixed_pass1", fixed},
                        {"family_pass1", family},
                        {"pattern_usage", usage}};
}

inline nlohmann::json to_json(const EvalSnapshot& s) {
  nlohmann::json j = to_json(s.report);
  j["step"] = s.step;
  return j;
}

// Line-delimited log. The first line names the log and carries the config
// digest; every later line is one record. No timestamps anywhere, so a rerun
// is byte-identical.
class JsonlWriter {
 public:
  JsonlWriter(const std::string& path, const std::string& digest, const std::string& kind) {
    f_.open(path, std::ios::binary | std::ios::trunc);
    if (!f_) throw StateError("log: cannot open '" + path + "' for writing");
    nlohmann::json head{{"config_digest", digest}, {"log", kind}};
    write(head);
  }
  void write(const nlohmann::json& j) {
    f_ << j.dump() << "\n";
    if (!f_) throw StateError("log: write failed");
  }

 private:
  std::ofstream f_;
};

inline void write_csv(const std::string& path, const std::vector<std::string>& header,
                      const std::vector<std::vector<std::string>>& rows) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw StateError("csv: cannot open '" + path + "' for writing");
  for (std::size_t i = 0; i < header.size(); ++i) f << (i ? "," : "") << header[i];
  f << "\n";
  for (const std::vector<std::string>& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) f << (i ? "," : "") << row[i];
    f << "\n";
  }
  if (!f) throw StateError("csv: write failed");
}

inline std::vector<std::vector<std::string>> ablation_csv_rows(
    const std::vector<AblationRow>& rows) {
  std::vector<std::vector<std::string>> out;
  for (const AblationRow& r : rows) {
    out.push_back({r.label, std::to_string(r.seed), number_text(r.eval_pass1),
                   number_text(r.final_train_reward), r.config_digest});
  }
  return out;
}

}  // namespace gpso
