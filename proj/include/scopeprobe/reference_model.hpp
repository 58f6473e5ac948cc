#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "scopeprobe/scorer.hpp"

namespace scopeprobe {

// Deterministic table-driven model used for testing and desk-scale runs.
//
//   uniform      every token gets probability 1/|vocab|, any mode
//   trigram      P(w3 | w1 w2) looked up over the context+target token
//                stream, histories padded with "<s>"; causal mode only
//   masked_table keyed by the full masked token sequence ("[MASK]" at the
//                scored position), value = distribution over tokens;
//                masked mode only
struct ReferenceTable {
  enum class Kind { UNIFORM, TRIGRAM, MASKED_TABLE };
  Kind kind = Kind::UNIFORM;
  std::vector<std::string> vocab;
  std::map<std::string, std::map<std::string, double>> table;
};

// Loads {vocab:[...], kind:"uniform"|"trigram"|"masked_table", table:{...}}.
// Probabilities outside (0,1] are rejected at load.
ReferenceTable load_reference_table(const std::filesystem::path& path);

inline constexpr const char* kSentinelToken = "<s>";
inline constexpr const char* kMaskToken = "[MASK]";

class ReferenceBackend : public Backend {
 public:
  ReferenceBackend(BackendDescriptor desc, ReferenceTable table);

  std::vector<double> causal_token_logprobs(
      const std::string& context, const std::string& target) const override;
  std::vector<double> masked_token_logprobs(
      const std::string& context, const std::string& target) const override;
  BackendKind scoring_mode() const override;

  const ReferenceTable& table() const { return table_; }

 private:
  ReferenceTable table_;
};

}  // namespace scopeprobe
