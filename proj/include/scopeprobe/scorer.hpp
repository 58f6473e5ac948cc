#pragma once

#include <memory>
#include <string>
#include <vector>

#include "scopeprobe/stimuli.hpp"

namespace scopeprobe {

enum class BackendKind { CAUSAL, MASKED, PROMPTED, REFERENCE };

std::string to_string(BackendKind k);
BackendKind backend_kind_from_string(const std::string& s);

// The prompt sent by prompted backends, with {context} and
// {target sentence} substituted at request time.
extern const char* const kDefaultPromptTemplate;

struct BackendDescriptor {
  std::string backend_id;
  BackendKind kind = BackendKind::REFERENCE;
  std::string model_name;
  std::string endpoint;            // required for PROMPTED and remote kinds
  int max_context_tokens = 4096;
  std::string reference_table;     // table file, REFERENCE only
  std::string family;              // model family label for grouping; defaults to model_name
  std::string prompt_template = kDefaultPromptTemplate;
  double prompt_epsilon = 1e-6;    // floor applied before ln(p)
  int retries = 2;                 // extra attempts on transport failure
};

// Checks descriptor invariants (endpoint presence, table presence, ...).
void validate_descriptor(const BackendDescriptor& d);

struct ConditionalScore {
  std::string item_id;
  std::string backend_id;
  Condition condition = Condition::SS;
  double logprob_total = 0.0;  // natural log
  int token_count = 0;         // target tokens only (1 for PROMPTED)
  BackendKind mode = BackendKind::REFERENCE;
};

// Live scoring adapter constructed from a descriptor. Adapters here are
// stateless after construction and safe for concurrent use.
class Backend {
 public:
  explicit Backend(BackendDescriptor desc) : desc_(std::move(desc)) {}
  virtual ~Backend() = default;

  const BackendDescriptor& descriptor() const { return desc_; }

  // Per-target-token log-probabilities under chain-rule decomposition.
  virtual std::vector<double> causal_token_logprobs(
      const std::string& context, const std::string& target) const;

  // Per-position log-probabilities with exactly that position masked.
  virtual std::vector<double> masked_token_logprobs(
      const std::string& context, const std::string& target) const;

  // Elicited acceptance probability in [0,1].
  virtual double prompted_probability(const std::string& context,
                                      const std::string& target) const;

  // Mode used when scoring whole items with this backend.
  virtual BackendKind scoring_mode() const = 0;

 protected:
  BackendDescriptor desc_;
};

std::unique_ptr<Backend> make_backend(const BackendDescriptor& desc);

// Chain-rule conditional score: sum of log P(t_i | context, t_1..t_{i-1})
// over target tokens. Context tokens contribute no probability terms.
ConditionalScore score_causal(const std::string& context,
                              const std::string& target,
                              const Backend& backend,
                              const std::string& item_id = "");

// Pseudo-log-likelihood: sum over target positions of the log-probability
// of the true token with that single position masked.
ConditionalScore score_masked(const std::string& context,
                              const std::string& target,
                              const Backend& backend,
                              const std::string& item_id = "");

// Sends the prompt template with substitutions and parses the reply as a
// single decimal in [0,1]; logprob_total = ln(max(p, epsilon)).
ConditionalScore score_prompted(const std::string& context,
                                const std::string& target,
                                const Backend& backend,
                                const std::string& item_id = "");

struct ScorePair {
  ConditionalScore ss;
  ConditionalScore is;
};

// Scores the same target against both contexts, dispatching on the
// backend's scoring mode. Either both conditions succeed or the error
// propagates; a half-pair is never returned.
ScorePair score_item(const StimulusItem& item, const Backend& backend);

}  // namespace scopeprobe
