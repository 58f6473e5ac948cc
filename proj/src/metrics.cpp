#include "scopeprobe/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "scopeprobe/errors.hpp"

namespace scopeprobe {

std::string to_string(HumanMapping m) {
  return m == HumanMapping::MIDPOINT_BINARIZE ? "midpoint_binarize"
                                              : "mean_rating";
}

HumanMapping human_mapping_from_string(const std::string& s) {
  if (s == "midpoint_binarize") return HumanMapping::MIDPOINT_BINARIZE;
  if (s == "mean_rating") return HumanMapping::MEAN_RATING;
  throw ConfigError("unknown human_mapping: \"" + s +
                    "\" (legal: midpoint_binarize, mean_rating)");
}

ResponseDistribution make_distribution(std::vector<std::string> support,
                                       std::vector<double> probs) {
  if (support.size() != probs.size() || support.empty()) {
    throw MetricError("distribution support and probabilities must be "
                      "non-empty and equal length");
  }
  double sum = 0.0;
  for (const double p : probs) {
    if (!std::isfinite(p)) throw MetricError("non-finite probability mass");
    if (p < 0.0) throw MetricError("negative probability mass");
    sum += p;
  }
  if (std::abs(sum - 1.0) > 1e-12) {
    throw MetricError("probabilities sum to " + std::to_string(sum) +
                      ", expected 1 within 1e-12");
  }
  return ResponseDistribution{std::move(support), std::move(probs)};
}

SurprisalRecord to_surprisal(const ConditionalScore& score) {
  if (score.mode == BackendKind::PROMPTED) {
    throw MetricError("prompted scores have no length normalization; use "
                      "prompted_surprisal");
  }
  if (score.token_count < 1) throw MetricError("token_count must be >= 1");
  if (!std::isfinite(score.logprob_total) || score.logprob_total > 0.0) {
    throw MetricError("logprob_total must be finite and <= 0");
  }
  SurprisalRecord r;
  r.item_id = score.item_id;
  r.backend_id = score.backend_id;
  r.condition = score.condition;
  r.surprisal_mean = -score.logprob_total / score.token_count;
  return r;
}

SurprisalRecord prompted_surprisal(const ConditionalScore& score) {
  if (score.mode != BackendKind::PROMPTED) {
    throw MetricError("prompted_surprisal requires a PROMPTED score");
  }
  if (!std::isfinite(score.logprob_total) || score.logprob_total > 0.0) {
    throw MetricError("logprob_total must be finite and <= 0");
  }
  SurprisalRecord r;
  r.item_id = score.item_id;
  r.backend_id = score.backend_id;
  r.condition = score.condition;
  r.surprisal_mean = -score.logprob_total;
  return r;
}

PreferenceRecord label_preference(const SurprisalRecord& s_ss,
                                  const SurprisalRecord& s_is) {
  if (s_ss.item_id != s_is.item_id || s_ss.backend_id != s_is.backend_id) {
    throw MetricError("preference label requires matching item_id and "
                      "backend_id: (" + s_ss.item_id + ", " + s_ss.backend_id +
                      ") vs (" + s_is.item_id + ", " + s_is.backend_id + ")");
  }
  if (s_ss.condition != Condition::SS || s_is.condition != Condition::IS) {
    throw MetricError("label_preference expects an (SS, IS) surprisal pair");
  }
  PreferenceRecord r;
  r.item_id = s_ss.item_id;
  r.backend_id = s_ss.backend_id;
  r.margin = s_is.surprisal_mean - s_ss.surprisal_mean;
  r.tie = (r.margin == 0.0);
  r.label = r.margin > 0.0 ? 1 : 0;
  return r;
}

ResponseDistribution llm_response_distribution(double s_ss, double s_is,
                                               Condition condition,
                                               double tau) {
  if (!std::isfinite(s_ss) || !std::isfinite(s_is)) {
    throw MetricError("non-finite surprisal input");
  }
  if (!(tau > 0.0)) throw MetricError("tau must be positive");

  // log-sum-exp guard: factor out the larger exponent
  const double a = -s_ss / tau;
  const double b = -s_is / tau;
  const double m = std::max(a, b);
  const double za = std::exp(a - m);
  const double zb = std::exp(b - m);
  const double num = condition == Condition::SS ? za : zb;
  const double p_accept = num / (za + zb);
  return ResponseDistribution{{"accept", "reject"}, {p_accept, 1.0 - p_accept}};
}

ResponseDistribution human_response_distribution(const std::vector<int>& ratings,
                                                 HumanMapping mapping) {
  if (ratings.empty()) throw MetricError("empty ratings list");
  for (const int r : ratings) {
    if (r < 1 || r > 7) {
      throw MetricError("rating out of range [1,7]: " + std::to_string(r));
    }
  }
  double p_accept = 0.0;
  if (mapping == HumanMapping::MIDPOINT_BINARIZE) {
    double accept = 0.0;
    for (const int r : ratings) {
      if (r >= 5) accept += 1.0;
      else if (r == 4) accept += 0.5;
    }
    p_accept = accept / static_cast<double>(ratings.size());
  } else {
    const double mean = std::accumulate(ratings.begin(), ratings.end(), 0.0) /
                        static_cast<double>(ratings.size());
    p_accept = (mean - 1.0) / 6.0;
  }
  return ResponseDistribution{{"accept", "reject"}, {p_accept, 1.0 - p_accept}};
}

namespace {

// KL(p || m) in bits with 0*log0 = 0.
double kl_bits(const std::vector<double>& p, const std::vector<double>& m) {
  double kl = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] > 0.0) kl += p[i] * std::log2(p[i] / m[i]);
  }
  return kl;
}

}  // namespace

double js_divergence(const ResponseDistribution& p,
                     const ResponseDistribution& q) {
  if (p.support != q.support) {
    throw MetricError("distribution support mismatch");
  }
  if (p.probs.size() != q.probs.size() || p.probs.size() != p.support.size()) {
    throw MetricError("distribution size mismatch");
  }
  // Canonical argument order makes jsd(p,q) and jsd(q,p) the same
  // floating-point expression, so symmetry is exact.
  const std::vector<double>* a = &p.probs;
  const std::vector<double>* b = &q.probs;
  if (std::lexicographical_compare(b->begin(), b->end(), a->begin(), a->end())) {
    std::swap(a, b);
  }
  std::vector<double> mid(a->size());
  for (std::size_t i = 0; i < mid.size(); ++i) {
    mid[i] = 0.5 * ((*a)[i] + (*b)[i]);
  }
  const double jsd = 0.5 * kl_bits(*a, mid) + 0.5 * kl_bits(*b, mid);
  // clamp floating-point excursions outside the analytic [0,1] bound
  return std::min(1.0, std::max(0.0, jsd));
}

double hs_score(const ResponseDistribution& p_llm,
                const ResponseDistribution& q_human) {
  return 1.0 - js_divergence(p_llm, q_human);
}

std::vector<HSResult> aggregate_hs(const std::vector<HSInput>& inputs) {
  using CellKey = std::tuple<std::string, std::string, std::string, std::string>;
  std::map<CellKey, std::vector<std::pair<std::string, double>>> cells;
  for (const auto& in : inputs) {
    if (!std::isfinite(in.jsd) || in.jsd < 0.0 || in.jsd > 1.0) {
      throw MetricError("jsd out of [0,1] for item " + in.item_id);
    }
    const CellKey key{in.backend_id, to_string(in.group),
                      to_string(in.structure), to_string(in.interpretation)};
    auto& items = cells[key];
    for (const auto& [existing_id, _] : items) {
      if (existing_id == in.item_id) {
        throw MetricError("item " + in.item_id +
                          " contributes twice to cell (" + in.backend_id +
                          ", " + to_string(in.group) + ", " +
                          to_string(in.structure) + ", " +
                          to_string(in.interpretation) + ")");
      }
    }
    items.emplace_back(in.item_id, in.jsd);
  }

  std::vector<HSResult> out;
  for (auto& [key, items] : cells) {
    std::sort(items.begin(), items.end());
    HSResult r;
    r.backend_id = std::get<0>(key);
    r.group = group_from_string(std::get<1>(key));
    r.structure = structure_from_string(std::get<2>(key));
    r.interpretation = condition_from_string(std::get<3>(key));
    double sum = 0.0;
    for (const auto& [_, jsd] : items) sum += 1.0 - jsd;
    r.hs_mean = sum / static_cast<double>(items.size());
    r.per_item = std::move(items);
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace scopeprobe
