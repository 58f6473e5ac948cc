#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace scopeprobe::stats {

// ---------------------------------------------------------------------------
// Distribution functions (exposed for oracle tests)

// Regularized incomplete beta I_x(a, b).
double incomplete_beta(double a, double b, double x);

double student_t_cdf(double t, double df);
double f_cdf(double x, double df1, double df2);

// CDF of the studentized range statistic with k groups and df error
// degrees of freedom, evaluated by nested Gauss-Legendre quadrature.
double studentized_range_cdf(double q, int k, double df);

// Tukey HSD adjusted p-value: P(Q_{k,df} >= q).
double tukey_p_value(double q, int k, double df);

// ---------------------------------------------------------------------------
// Data model

// One modeling row: response plus categorical predictors, clustered by item.
struct DataRow {
  double response = 0.0;
  std::string cluster_id;
  std::map<std::string, std::string> factors;
};

struct ModelSpec {
  std::vector<std::string> main_effects;
  std::vector<std::pair<std::string, std::string>> interactions;
};

struct Coefficient {
  double estimate = 0.0;
  double std_error = 0.0;
  double p_value = 1.0;
};

struct RegressionResult {
  std::string formula;
  std::vector<std::string> names;          // "(Intercept)", "factor[level]", ...
  std::vector<Coefficient> coefficients;   // parallel to names
  std::string coding = "sum";
  std::string cluster = "item";
  int n_boot = 0;
  std::uint64_t seed = 0;
  bool separation = false;   // logistic separation detected; ridge applied
  bool degenerate = false;   // zero-variance response
  // bootstrap draws per coefficient, kept for post-hoc contrasts
  std::vector<std::vector<double>> boot_draws;
  // factor -> sorted levels, as coded in the design
  std::map<std::string, std::vector<std::string>> factor_levels;
};

struct Contrast {
  std::string level_a;
  std::string level_b;
  double estimate = 0.0;
  double p_raw = 1.0;
  double p_adjusted = 1.0;
};

// One tested effect ("language", "group:model", ...).
struct AnovaResult {
  std::vector<std::string> factors;
  double F = 0.0;
  std::pair<double, double> df{0.0, 0.0};
  double p_value = 1.0;
  double ss = 0.0;
  std::vector<std::pair<std::string, std::vector<Contrast>>> posthoc;
};

// Observations for ANOVA: value + one level per factor.
struct Observation {
  double value = 0.0;
  std::vector<std::string> levels;
};

struct FactorTable {
  std::vector<std::string> factor_names;
  std::vector<Observation> rows;
};

// ---------------------------------------------------------------------------
// Design matrices (exposed for oracle tests)

// Sum-coded design: a k-level factor contributes k-1 columns that each sum
// to zero over levels; interactions are elementwise column products.
struct Design {
  std::vector<std::vector<double>> columns;  // column-major, incl. intercept
  std::vector<std::string> names;
  std::map<std::string, std::vector<std::string>> factor_levels;
};

Design build_design(const std::vector<DataRow>& rows, const ModelSpec& spec);

// ---------------------------------------------------------------------------
// Regression with item-clustered bootstrap inference

// Logistic regression on a binary response (sum coding), standard errors
// and two-sided p-values from a cluster bootstrap over items. Complete
// separation yields a finite ridge-penalized fit with the flag set.
RegressionResult fit_preference_model(const std::vector<DataRow>& rows,
                                      const ModelSpec& spec,
                                      int n_boot = 2000,
                                      std::uint64_t seed = 42);

// Linear regression, same coding and inference scheme. Rank-deficient
// designs raise an error listing the aliased columns.
RegressionResult fit_surprisal_model(const std::vector<DataRow>& rows,
                                     const ModelSpec& spec,
                                     int n_boot = 2000,
                                     std::uint64_t seed = 42);

// All level-pair contrasts of `factor`, estimates on the linear-predictor
// scale, Holm-adjusted bootstrap p-values.
std::vector<Contrast> pairwise_contrasts(const RegressionResult& model,
                                         const std::string& factor);

// ---------------------------------------------------------------------------
// ANOVA

// One- or two-factor ANOVA over `factors` (Type II sums of squares for
// unbalanced two-factor data). Returns one result per tested effect;
// Tukey HSD contrasts are attached for each factor in `posthoc_factors`.
std::vector<AnovaResult> anova(const FactorTable& table,
                               const std::vector<std::string>& factors,
                               const std::vector<std::string>& posthoc_factors = {});

// Freedman-Lane permutation p-value for the two-factor interaction;
// cross-check utility for the F-based interaction test.
double permutation_interaction_p(const FactorTable& table, int n_shuffles,
                                 std::uint64_t seed);

// Deterministic per-replicate RNG stream derivation.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t index);

}  // namespace scopeprobe::stats
