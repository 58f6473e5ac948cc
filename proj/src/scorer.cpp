#include "scopeprobe/scorer.hpp"

#include <cmath>
#include <limits>

#include "scopeprobe/errors.hpp"
#include "scopeprobe/reference_model.hpp"
#include "scopeprobe/remote.hpp"
#include "scopeprobe/text.hpp"

namespace scopeprobe {

const char* const kDefaultPromptTemplate =
    "You are an AI model trained to compute conditional probabilities. Given "
    "the {context}, what is the probability that the following {target "
    "sentence} will occur next? Respond with ONLY a number from 0.0 to 1.0 "
    "and nothing else.";

std::string to_string(BackendKind k) {
  switch (k) {
    case BackendKind::CAUSAL: return "CAUSAL";
    case BackendKind::MASKED: return "MASKED";
    case BackendKind::PROMPTED: return "PROMPTED";
    case BackendKind::REFERENCE: return "REFERENCE";
  }
  return "REFERENCE";
}

BackendKind backend_kind_from_string(const std::string& s) {
  if (s == "CAUSAL") return BackendKind::CAUSAL;
  if (s == "MASKED") return BackendKind::MASKED;
  if (s == "PROMPTED") return BackendKind::PROMPTED;
  if (s == "REFERENCE") return BackendKind::REFERENCE;
  throw ConfigError("unknown backend kind: \"" + s +
                    "\" (legal: CAUSAL, MASKED, PROMPTED, REFERENCE)");
}

void validate_descriptor(const BackendDescriptor& d) {
  if (d.backend_id.empty()) throw ConfigError("backend_id must be non-empty");
  if (d.max_context_tokens <= 0) {
    throw ConfigError("backend " + d.backend_id +
                      ": max_context_tokens must be positive");
  }
  const bool remote = d.kind == BackendKind::CAUSAL ||
                      d.kind == BackendKind::MASKED ||
                      d.kind == BackendKind::PROMPTED;
  if (remote && d.endpoint.empty()) {
    throw ConfigError("backend " + d.backend_id + ": kind " +
                      to_string(d.kind) + " requires an endpoint");
  }
  if (d.kind == BackendKind::REFERENCE && d.reference_table.empty()) {
    throw ConfigError("backend " + d.backend_id +
                      ": REFERENCE kind requires reference_table");
  }
  if (d.prompt_epsilon <= 0.0 || d.prompt_epsilon >= 1.0) {
    throw ConfigError("backend " + d.backend_id +
                      ": prompt_epsilon must be in (0,1)");
  }
}

std::vector<double> Backend::causal_token_logprobs(const std::string&,
                                                   const std::string&) const {
  throw ScoringError("backend " + desc_.backend_id +
                     " does not support causal scoring");
}

std::vector<double> Backend::masked_token_logprobs(const std::string&,
                                                   const std::string&) const {
  throw ScoringError("backend " + desc_.backend_id +
                     " does not support masked scoring");
}

double Backend::prompted_probability(const std::string&,
                                     const std::string&) const {
  throw ScoringError("backend " + desc_.backend_id +
                     " does not support prompted scoring");
}

std::unique_ptr<Backend> make_backend(const BackendDescriptor& desc) {
  validate_descriptor(desc);
  switch (desc.kind) {
    case BackendKind::REFERENCE:
      return std::make_unique<ReferenceBackend>(
          desc, load_reference_table(desc.reference_table));
    case BackendKind::CAUSAL:
    case BackendKind::MASKED:
      return std::make_unique<RemoteBackend>(desc);
    case BackendKind::PROMPTED:
      return std::make_unique<PromptedBackend>(desc);
  }
  throw ConfigError("unreachable backend kind");
}

namespace {

void check_window(const std::string& context, const std::string& target,
                  const BackendDescriptor& desc) {
  const std::size_t n = tokenize(context).size() + tokenize(target).size();
  if (n > static_cast<std::size_t>(desc.max_context_tokens)) {
    throw ScoringError("context window overflow: " + std::to_string(n) +
                       " tokens exceed max_context_tokens=" +
                       std::to_string(desc.max_context_tokens) +
                       " for backend " + desc.backend_id);
  }
}

// Shared validation: every per-token term must be a finite log of a
// probability in (0,1]. Probability 0 (-inf) is a backend fault, not a
// storable score.
ConditionalScore finish_score(std::vector<double> lps,
                              const BackendDescriptor& desc,
                              const std::string& item_id, Condition condition,
                              BackendKind mode) {
  double total = 0.0;
  for (const double lp : lps) {
    if (std::isinf(lp) && lp < 0.0) {
      throw ScoringError("probability 0 from backend " + desc.backend_id +
                         " (log-probability -inf)");
    }
    if (!std::isfinite(lp)) {
      throw ScoringError("non-finite log-probability from backend " +
                         desc.backend_id);
    }
    if (lp > 0.0) {
      throw ScoringError("log-probability above 0 from backend " +
                         desc.backend_id);
    }
    total += lp;
  }
  if (!std::isfinite(total)) {
    throw ScoringError("non-finite total log-probability from backend " +
                       desc.backend_id);
  }
  ConditionalScore score;
  score.item_id = item_id;
  score.backend_id = desc.backend_id;
  score.condition = condition;
  score.logprob_total = total;
  score.token_count = static_cast<int>(lps.size());
  score.mode = mode;
  return score;
}

}  // namespace

ConditionalScore score_causal(const std::string& context,
                              const std::string& target,
                              const Backend& backend,
                              const std::string& item_id) {
  const auto& desc = backend.descriptor();
  if (desc.kind != BackendKind::CAUSAL && desc.kind != BackendKind::REFERENCE) {
    throw ScoringError("backend " + desc.backend_id + " has kind " +
                       to_string(desc.kind) + "; causal scoring requires "
                       "CAUSAL or REFERENCE");
  }
  if (trim(target).empty()) throw ScoringError("empty target");
  check_window(context, target, desc);
  auto lps = backend.causal_token_logprobs(context, target);
  if (lps.empty()) {
    throw ScoringError("backend " + desc.backend_id +
                       " returned no target tokens");
  }
  const BackendKind mode = desc.kind == BackendKind::REFERENCE
                               ? BackendKind::REFERENCE
                               : BackendKind::CAUSAL;
  return finish_score(std::move(lps), desc, item_id, Condition::SS, mode);
}

ConditionalScore score_masked(const std::string& context,
                              const std::string& target,
                              const Backend& backend,
                              const std::string& item_id) {
  const auto& desc = backend.descriptor();
  if (desc.kind != BackendKind::MASKED && desc.kind != BackendKind::REFERENCE) {
    throw ScoringError("backend " + desc.backend_id + " has kind " +
                       to_string(desc.kind) + "; masked scoring requires "
                       "MASKED or REFERENCE");
  }
  if (trim(target).empty()) throw ScoringError("empty target");
  check_window(context, target, desc);
  auto lps = backend.masked_token_logprobs(context, target);
  if (lps.empty()) {
    throw ScoringError("backend " + desc.backend_id +
                       " returned no target tokens");
  }
  const BackendKind mode = desc.kind == BackendKind::REFERENCE
                               ? BackendKind::REFERENCE
                               : BackendKind::MASKED;
  return finish_score(std::move(lps), desc, item_id, Condition::SS, mode);
}

ConditionalScore score_prompted(const std::string& context,
                                const std::string& target,
                                const Backend& backend,
                                const std::string& item_id) {
  const auto& desc = backend.descriptor();
  if (desc.kind != BackendKind::PROMPTED) {
    throw ScoringError("backend " + desc.backend_id + " has kind " +
                       to_string(desc.kind) +
                       "; prompted scoring requires PROMPTED");
  }
  if (trim(target).empty()) throw ScoringError("empty target");
  const double p = backend.prompted_probability(context, target);
  if (p < 0.0 || p > 1.0) {
    throw ProtocolError("backend " + desc.backend_id +
                        " returned probability outside [0,1]");
  }
  const double clamped = std::max(p, desc.prompt_epsilon);

  ConditionalScore score;
  score.item_id = item_id;
  score.backend_id = desc.backend_id;
  score.condition = Condition::SS;
  score.logprob_total = std::log(std::min(clamped, 1.0));
  score.token_count = 1;  // prompted scores are not length-normalizable
  score.mode = BackendKind::PROMPTED;
  return score;
}

ScorePair score_item(const StimulusItem& item, const Backend& backend) {
  const auto score_one = [&](Condition c) {
    ConditionalScore s;
    switch (backend.scoring_mode()) {
      case BackendKind::CAUSAL:
      case BackendKind::REFERENCE:
        s = score_causal(item.context(c), item.target, backend, item.id);
        break;
      case BackendKind::MASKED:
        s = score_masked(item.context(c), item.target, backend, item.id);
        break;
      case BackendKind::PROMPTED:
        s = score_prompted(item.context(c), item.target, backend, item.id);
        break;
    }
    s.condition = c;
    return s;
  };
  // Either both succeed or the exception propagates; never a half-pair.
  ScorePair pair{score_one(Condition::SS), score_one(Condition::IS)};
  return pair;
}

}  // namespace scopeprobe
