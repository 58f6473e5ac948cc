#include "scopeprobe/remote.hpp"

#include <httplib.h>
#include <nlohmann/json.hpp>

#include <cctype>
#include <cmath>
#include <cstdlib>

#include "scopeprobe/errors.hpp"

namespace scopeprobe {

using nlohmann::json;

ParsedUrl parse_http_url(const std::string& url) {
  const std::string prefix = "http://";
  if (url.rfind(prefix, 0) != 0) {
    throw ConfigError("endpoint must be a plain http:// URL: " + url);
  }
  ParsedUrl out;
  const std::string rest = url.substr(prefix.size());
  const std::size_t slash = rest.find('/');
  std::string hostport = slash == std::string::npos ? rest : rest.substr(0, slash);
  out.path = slash == std::string::npos ? "/" : rest.substr(slash);
  const std::size_t colon = hostport.rfind(':');
  if (colon != std::string::npos) {
    out.host = hostport.substr(0, colon);
    const std::string port_text = hostport.substr(colon + 1);
    char* end = nullptr;
    const long port = std::strtol(port_text.c_str(), &end, 10);
    if (end == port_text.c_str() || *end != '\0' || port <= 0 || port > 65535) {
      throw ConfigError("bad port in endpoint: " + url);
    }
    out.port = static_cast<int>(port);
  } else {
    out.host = hostport;
  }
  if (out.host.empty()) throw ConfigError("bad endpoint: " + url);
  return out;
}

namespace {

// POST with retries on connection-level failure; non-200 replies fail fast.
std::string post_json(const BackendDescriptor& desc, const std::string& body) {
  const ParsedUrl url = parse_http_url(desc.endpoint);
  const int attempts = desc.retries + 1;
  std::string last_error;
  for (int attempt = 1; attempt <= attempts; ++attempt) {
    httplib::Client client(url.host, url.port);
    client.set_connection_timeout(10, 0);
    client.set_read_timeout(120, 0);
    auto res = client.Post(url.path, body, "application/json");
    if (!res) {
      last_error = httplib::to_string(res.error());
      continue;
    }
    if (res->status != 200) {
      throw TransportError("backend " + desc.backend_id + ": " + desc.endpoint +
                           " returned status " + std::to_string(res->status));
    }
    return res->body;
  }
  throw TransportError("backend " + desc.backend_id + ": " + desc.endpoint +
                       " unreachable after " + std::to_string(attempts) +
                       " attempts (" + last_error + ")");
}

}  // namespace

RemoteBackend::RemoteBackend(BackendDescriptor desc) : Backend(std::move(desc)) {
  validate_descriptor(desc_);
  if (desc_.kind != BackendKind::CAUSAL && desc_.kind != BackendKind::MASKED) {
    throw ConfigError("remote backend " + desc_.backend_id +
                      " must be CAUSAL or MASKED");
  }
}

std::vector<double> RemoteBackend::request_logprobs(
    const std::string& mode, const std::string& context,
    const std::string& target) const {
  json req;
  req["mode"] = mode;
  req["context"] = context;
  req["target"] = target;
  req["model"] = desc_.model_name;
  const std::string body = post_json(desc_, req.dump());

  json reply;
  try {
    reply = json::parse(body);
  } catch (const json::exception& e) {
    throw ProtocolError("backend " + desc_.backend_id +
                        ": reply is not JSON: " + e.what());
  }
  if (!reply.contains("token_logprobs") || !reply.at("token_logprobs").is_array()) {
    throw ProtocolError("backend " + desc_.backend_id +
                        ": reply lacks token_logprobs array; raw reply: " + body);
  }
  std::vector<double> lps;
  for (const auto& v : reply.at("token_logprobs")) {
    if (!v.is_number()) {
      throw ProtocolError("backend " + desc_.backend_id +
                          ": non-numeric token logprob; raw reply: " + body);
    }
    lps.push_back(v.get<double>());
  }
  if (lps.empty()) {
    throw ProtocolError("backend " + desc_.backend_id +
                        ": empty token_logprobs");
  }
  return lps;
}

std::vector<double> RemoteBackend::causal_token_logprobs(
    const std::string& context, const std::string& target) const {
  if (desc_.kind != BackendKind::CAUSAL) {
    throw ScoringError("backend " + desc_.backend_id +
                       " is MASKED; causal scoring unsupported");
  }
  return request_logprobs("causal", context, target);
}

std::vector<double> RemoteBackend::masked_token_logprobs(
    const std::string& context, const std::string& target) const {
  if (desc_.kind != BackendKind::MASKED) {
    throw ScoringError("backend " + desc_.backend_id +
                       " is CAUSAL; masked scoring unsupported");
  }
  return request_logprobs("masked", context, target);
}

PromptedBackend::PromptedBackend(BackendDescriptor desc)
    : Backend(std::move(desc)) {
  validate_descriptor(desc_);
}

std::string render_prompt(const std::string& prompt_template,
                          const std::string& context,
                          const std::string& target) {
  std::string out = prompt_template;
  const auto replace_all = [&out](const std::string& from, const std::string& to) {
    std::size_t pos = 0;
    while ((pos = out.find(from, pos)) != std::string::npos) {
      out.replace(pos, from.size(), to);
      pos += to.size();
    }
  };
  replace_all("{context}", context);
  replace_all("{target sentence}", target);
  return out;
}

double parse_probability_reply(const std::string& reply) {
  std::size_t b = 0, e = reply.size();
  while (b < e && std::isspace(static_cast<unsigned char>(reply[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(reply[e - 1]))) --e;
  const std::string body = reply.substr(b, e - b);

  bool saw_digit = false;
  bool saw_dot = false;
  for (const char c : body) {
    if (c >= '0' && c <= '9') {
      saw_digit = true;
    } else if (c == '.' && !saw_dot) {
      saw_dot = true;
    } else {
      throw ProtocolError("reply is not a single decimal in [0,1]: \"" + reply +
                          "\"");
    }
  }
  if (!saw_digit) {
    throw ProtocolError("reply is not a single decimal in [0,1]: \"" + reply +
                        "\"");
  }
  const double p = std::strtod(body.c_str(), nullptr);
  if (p < 0.0 || p > 1.0) {
    throw ProtocolError("probability outside [0,1]: \"" + reply + "\"");
  }
  return p;
}

double PromptedBackend::prompted_probability(const std::string& context,
                                             const std::string& target) const {
  const std::string prompt = render_prompt(desc_.prompt_template, context, target);
  json req;
  req["model"] = desc_.model_name;
  req["messages"] = json::array({json{{"role", "user"}, {"content", prompt}}});
  const std::string body = post_json(desc_, req.dump());

  json reply;
  try {
    reply = json::parse(body);
  } catch (const json::exception& e) {
    throw ProtocolError("backend " + desc_.backend_id +
                        ": reply is not JSON: " + e.what());
  }
  std::string content;
  try {
    content = reply.at("choices").at(0).at("message").at("content").get<std::string>();
  } catch (const json::exception&) {
    throw ProtocolError("backend " + desc_.backend_id +
                        ": reply lacks choices[0].message.content; raw reply: " +
                        body);
  }
  return parse_probability_reply(content);
}

}  // namespace scopeprobe
