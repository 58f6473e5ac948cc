#include "scopeprobe/reference_model.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <fstream>

#include "scopeprobe/errors.hpp"
#include "scopeprobe/text.hpp"

namespace scopeprobe {

using nlohmann::json;

ReferenceTable load_reference_table(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open reference table: " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError("malformed reference table " + path.string() + ": " +
                      e.what());
  }

  ReferenceTable t;
  const std::string kind = doc.value("kind", "");
  if (kind == "uniform") {
    t.kind = ReferenceTable::Kind::UNIFORM;
  } else if (kind == "trigram") {
    t.kind = ReferenceTable::Kind::TRIGRAM;
  } else if (kind == "masked_table") {
    t.kind = ReferenceTable::Kind::MASKED_TABLE;
  } else {
    throw ConfigError("reference table kind must be uniform, trigram, or "
                      "masked_table; got \"" + kind + "\"");
  }

  if (!doc.contains("vocab") || !doc.at("vocab").is_array()) {
    throw ConfigError("reference table missing vocab array");
  }
  for (const auto& v : doc.at("vocab")) t.vocab.push_back(v.get<std::string>());
  if (t.vocab.empty()) throw ConfigError("reference table vocab is empty");

  if (t.kind != ReferenceTable::Kind::UNIFORM) {
    if (!doc.contains("table") || !doc.at("table").is_object()) {
      throw ConfigError("reference table missing table object");
    }
    for (const auto& [key, dist] : doc.at("table").items()) {
      if (!dist.is_object()) {
        throw ConfigError("table entry \"" + key + "\" must map tokens to "
                          "probabilities");
      }
      for (const auto& [tok, p] : dist.items()) {
        const double prob = p.get<double>();
        if (!(prob > 0.0) || prob > 1.0) {
          throw ConfigError("probability out of (0,1] for \"" + tok +
                            "\" under \"" + key + "\"");
        }
        t.table[key][tok] = prob;
      }
    }
  }
  return t;
}

ReferenceBackend::ReferenceBackend(BackendDescriptor desc, ReferenceTable table)
    : Backend(std::move(desc)), table_(std::move(table)) {}

BackendKind ReferenceBackend::scoring_mode() const {
  return table_.kind == ReferenceTable::Kind::MASKED_TABLE
             ? BackendKind::MASKED
             : BackendKind::CAUSAL;
}

std::vector<double> ReferenceBackend::causal_token_logprobs(
    const std::string& context, const std::string& target) const {
  const auto ctx_tokens = tokenize(context);
  const auto tgt_tokens = tokenize(target);
  std::vector<double> lps;
  lps.reserve(tgt_tokens.size());

  if (table_.kind == ReferenceTable::Kind::UNIFORM) {
    const double lp = -std::log(static_cast<double>(table_.vocab.size()));
    lps.assign(tgt_tokens.size(), lp);
    return lps;
  }
  if (table_.kind != ReferenceTable::Kind::TRIGRAM) {
    throw ScoringError("reference table kind masked_table does not support "
                       "causal scoring (backend " + desc_.backend_id + ")");
  }

  std::vector<std::string> stream;
  stream.reserve(ctx_tokens.size() + tgt_tokens.size());
  stream.insert(stream.end(), ctx_tokens.begin(), ctx_tokens.end());
  stream.insert(stream.end(), tgt_tokens.begin(), tgt_tokens.end());
  const std::size_t first_target = ctx_tokens.size();

  for (std::size_t g = first_target; g < stream.size(); ++g) {
    const std::string h1 = g >= 2 ? stream[g - 2] : kSentinelToken;
    const std::string h2 = g >= 1 ? stream[g - 1] : kSentinelToken;
    const std::string key = h1 + " " + h2;
    const auto hist = table_.table.find(key);
    if (hist == table_.table.end()) {
      throw ScoringError("trigram table has no history \"" + key +
                         "\" (backend " + desc_.backend_id + ")");
    }
    const auto entry = hist->second.find(stream[g]);
    if (entry == hist->second.end()) {
      throw ScoringError("trigram table has no continuation \"" + stream[g] +
                         "\" after \"" + key + "\" (backend " +
                         desc_.backend_id + ")");
    }
    lps.push_back(std::log(entry->second));
  }
  return lps;
}

std::vector<double> ReferenceBackend::masked_token_logprobs(
    const std::string& context, const std::string& target) const {
  const auto ctx_tokens = tokenize(context);
  const auto tgt_tokens = tokenize(target);
  std::vector<double> lps;
  lps.reserve(tgt_tokens.size());

  if (table_.kind == ReferenceTable::Kind::UNIFORM) {
    const double lp = -std::log(static_cast<double>(table_.vocab.size()));
    lps.assign(tgt_tokens.size(), lp);
    return lps;
  }
  if (table_.kind != ReferenceTable::Kind::MASKED_TABLE) {
    throw ScoringError("reference table kind trigram does not support masked "
                       "scoring (backend " + desc_.backend_id + ")");
  }

  for (std::size_t i = 0; i < tgt_tokens.size(); ++i) {
    std::vector<std::string> seq = ctx_tokens;
    for (std::size_t k = 0; k < tgt_tokens.size(); ++k) {
      seq.push_back(k == i ? kMaskToken : tgt_tokens[k]);
    }
    const std::string key = join_tokens(seq);
    const auto entry = table_.table.find(key);
    if (entry == table_.table.end()) {
      throw ScoringError("masked table has no entry for \"" + key +
                         "\" (backend " + desc_.backend_id + ")");
    }
    const auto tok = entry->second.find(tgt_tokens[i]);
    if (tok == entry->second.end()) {
      throw ScoringError("masked table entry \"" + key +
                         "\" has no probability for \"" + tgt_tokens[i] +
                         "\" (backend " + desc_.backend_id + ")");
    }
    lps.push_back(std::log(tok->second));
  }
  return lps;
}

}  // namespace scopeprobe
