#pragma once

#include <string>
#include <vector>

#include "scopeprobe/scorer.hpp"

namespace scopeprobe {

// Splits "http://host:port/path" into client base and request path.
// Only plain http is supported; remote backends are expected to be local
// sidecars speaking the minimal scoring protocol.
struct ParsedUrl {
  std::string host;
  int port = 80;
  std::string path = "/";
};
ParsedUrl parse_http_url(const std::string& url);

// Speaks the minimal scoring protocol:
//   POST {mode:"causal"|"masked", context, target, model}
//   -> {token_logprobs:[...]} in natural log over target tokens.
class RemoteBackend : public Backend {
 public:
  explicit RemoteBackend(BackendDescriptor desc);

  std::vector<double> causal_token_logprobs(
      const std::string& context, const std::string& target) const override;
  std::vector<double> masked_token_logprobs(
      const std::string& context, const std::string& target) const override;
  BackendKind scoring_mode() const override { return desc_.kind; }

 private:
  std::vector<double> request_logprobs(const std::string& mode,
                                       const std::string& context,
                                       const std::string& target) const;
};

// Chat-style prompted backend. Sends the configured prompt template with
// {context} and {target sentence} substituted and expects the reply body
// to contain a single decimal in [0,1].
class PromptedBackend : public Backend {
 public:
  explicit PromptedBackend(BackendDescriptor desc);

  double prompted_probability(const std::string& context,
                              const std::string& target) const override;
  BackendKind scoring_mode() const override { return BackendKind::PROMPTED; }
};

// Fills the {context} / {target sentence} placeholders.
std::string render_prompt(const std::string& prompt_template,
                          const std::string& context,
                          const std::string& target);

// Strict single-number grammar: digits with at most one decimal point,
// surrounding whitespace allowed, nothing else. Throws ProtocolError
// (carrying the raw reply) otherwise.
double parse_probability_reply(const std::string& reply);

}  // namespace scopeprobe
