#pragma once

#include <string>
#include <utility>
#include <vector>

#include "scopeprobe/scorer.hpp"
#include "scopeprobe/stimuli.hpp"

namespace scopeprobe {

// Per-token mean surprisal in nats: -logprob_total / token_count.
struct SurprisalRecord {
  std::string item_id;
  std::string backend_id;
  Condition condition = Condition::SS;
  double surprisal_mean = 0.0;
};

// Binary reading preference: 1 = SS preferred (lower surprisal), 0 = IS.
// Exact ties label 0 with the tie flag set so they stay auditable.
struct PreferenceRecord {
  std::string item_id;
  std::string backend_id;
  int label = 0;
  double margin = 0.0;  // s_IS - s_SS, nats/token
  bool tie = false;
};

// Discrete distribution over an ordered support (default {accept, reject}).
struct ResponseDistribution {
  std::vector<std::string> support;
  std::vector<double> probs;
};

// Human Similarity cell: mean over items of (1 - JSD).
struct HSResult {
  std::string backend_id;
  HumanGroup group = HumanGroup::L1_EN;
  Structure structure = Structure::UE;
  Condition interpretation = Condition::SS;
  double hs_mean = 0.0;
  std::vector<std::pair<std::string, double>> per_item;  // (item_id, jsd)
};

enum class HumanMapping { MIDPOINT_BINARIZE, MEAN_RATING };
std::string to_string(HumanMapping m);
HumanMapping human_mapping_from_string(const std::string& s);

// Validates and builds a distribution (mass >= 0, sums to 1 within 1e-12).
ResponseDistribution make_distribution(std::vector<std::string> support,
                                       std::vector<double> probs);

// Length-normalized surprisal. PROMPTED scores are rejected; use
// prompted_surprisal for those.
SurprisalRecord to_surprisal(const ConditionalScore& score);

// Surprisal of a prompted score: -ln(elicited p), per sentence (no token
// normalization is meaningful for prompted backends).
SurprisalRecord prompted_surprisal(const ConditionalScore& score);

// Binary SS/IS label from a matched pair of surprisals.
PreferenceRecord label_preference(const SurprisalRecord& s_ss,
                                  const SurprisalRecord& s_is);

// Softmax acceptance distribution over the item's two condition
// surprisals at temperature tau, evaluated for `condition`:
//   p_accept = exp(-s_cond/tau) / (exp(-s_ss/tau) + exp(-s_is/tau))
// Depends only on the surprisal difference, so it is shift-invariant.
ResponseDistribution llm_response_distribution(double s_ss, double s_is,
                                               Condition condition,
                                               double tau);

// Human acceptance distribution from 7-point ratings. Midpoint rule:
// >=5 accepts, <=3 rejects, 4 splits half/half. Mean-rating rule:
// p_accept = (mean - 1) / 6.
ResponseDistribution human_response_distribution(
    const std::vector<int>& ratings,
    HumanMapping mapping = HumanMapping::MIDPOINT_BINARIZE);

// Jensen-Shannon divergence, log base 2, in [0,1]. Arguments are
// canonicalized so jsd(p,q) and jsd(q,p) evaluate the identical
// floating-point expression.
double js_divergence(const ResponseDistribution& p,
                     const ResponseDistribution& q);

// HS = 1 - JSD.
double hs_score(const ResponseDistribution& p_llm,
                const ResponseDistribution& q_human);

// One per-item JSD contribution to an HS cell.
struct HSInput {
  std::string backend_id;
  HumanGroup group = HumanGroup::L1_EN;
  Structure structure = Structure::UE;
  Condition interpretation = Condition::SS;
  std::string item_id;
  double jsd = 0.0;
};

// Means per (backend, group, structure, interpretation) cell; an item may
// contribute at most once per cell; empty cells are never emitted.
std::vector<HSResult> aggregate_hs(const std::vector<HSInput>& inputs);

}  // namespace scopeprobe
